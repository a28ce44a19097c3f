/** Full UI flow against a live service with the synthetic backend:
 * create a session, run an iteration, label the pending pairs through the
 * annotation store, submit atomically, evaluate, and check the dashboard
 * shows the report's F1 exactly. Requires the Python package installed
 * (`pip install -e ..`). */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { metricsTableRows } from "../src/dashboard.js";
import { BatchStore } from "../src/store.js";
import type { PairRecord } from "../src/types.js";

const PORT = 8900 + (process.pid % 500);
const BASE_URL = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let dataDir: string;

/** Pair whose token-Jaccard similarity is exactly shared/union. */
function pairWithSimilarity(id: string, shared: number, union: number, gold?: number): PairRecord {
  const common = Array.from({ length: shared }, (_, j) => `s${j}`);
  const rest = union - shared;
  const leftExtra = Array.from({ length: Math.ceil(rest / 2) }, (_, j) => `l${j}`);
  const rightExtra = Array.from({ length: Math.floor(rest / 2) }, (_, j) => `r${j}`);
  const record: PairRecord = {
    id,
    left: { title: [...common, ...leftExtra].join(" ") || "blank" },
    right: { title: [...common, ...rightExtra].join(" ") || "blank" },
  };
  if (gold !== undefined) record.gold = gold;
  return record;
}

function gridPool(count: number, prefix: string, withGold: boolean): PairRecord[] {
  return Array.from({ length: count }, (_, i) =>
    pairWithSimilarity(
      `${prefix}${String(i).padStart(3, "0")}`,
      i,
      count - 1,
      withGold ? (i / (count - 1) >= 0.5 ? 1 : 0) : undefined,
    ),
  );
}

async function waitForServer(timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE_URL}/openapi.json`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service did not come up on port ${PORT}`);
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "promptloop-ui-"));
  server = spawn(
    "python3",
    ["-m", "promptloop.cli", "serve", "--port", String(PORT), "--data-dir", dataDir],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 30000);

afterAll(() => {
  server?.kill("SIGTERM");
  rmSync(dataDir, { recursive: true, force: true });
});

describe("annotation flow against a live service", () => {
  const client = new ApiClient(BASE_URL);

  it("runs sample -> label -> submit -> evaluate, dashboard F1 exact", async () => {
    const created = await client.createSession({
      session_id: "ui-flow",
      config: {
        strategy: "self_consistency",
        batch_size: 2,
        committee_size: 3,
        mode: "incremental",
        seed: 3,
        require_explanation: false,
      },
      pool: gridPool(16, "p", true),
      eval_set: gridPool(8, "e", true),
    });
    expect(created.session_id).toBe("ui-flow");

    const iteration = await client.iterate("ui-flow");
    expect(iteration.pending).toHaveLength(2);
    for (const card of iteration.pending) {
      expect(card.votes).toHaveLength(3);
      expect(card.entropy).not.toBeNull();
    }

    const store = new BatchStore(
      iteration.pending,
      iteration.iteration,
      iteration.require_explanation,
    );

    // partial batch: the store refuses to build a payload...
    const firstPair = iteration.pending[0]!.pair_id;
    const secondPair = iteration.pending[1]!.pair_id;
    store.setLabel(firstPair, 1);
    expect(store.canSubmit()).toBe(false);
    expect(() => store.buildSubmissions()).toThrowError(/batch incomplete/);

    // ...and the server rejects one forced through anyway, without state loss
    const forced = await client
      .submitAnnotations("ui-flow", [{ pair_id: firstPair, label: 1 }])
      .catch((error) => error as ApiError);
    expect(forced).toBeInstanceOf(ApiError);
    expect((forced as ApiError).code).toBe("validation");
    expect((forced as ApiError).status).toBe(400);
    expect(store.card(firstPair).label).toBe(1); // local input preserved

    // complete the batch and submit atomically
    store.setLabel(secondPair, 0);
    expect(store.canSubmit()).toBe(true);
    const summary = await client.submitAnnotations("ui-flow", store.buildSubmissions());
    expect(summary.iteration).toBe(1);
    expect(summary.demonstration_count).toBe(2);

    // double submit is a non-destructive state error (409)
    const doubled = await client
      .submitAnnotations("ui-flow", store.buildSubmissions())
      .catch((error) => error as ApiError);
    expect((doubled as ApiError).code).toBe("state");
    expect((doubled as ApiError).status).toBe(409);

    // evaluate; the dashboard's displayed value equals the report exactly
    const report = await client.evaluate("ui-flow");
    const history = await client.history("ui-flow");
    expect(history.evaluations).toHaveLength(1);
    expect(history.evaluations[0]!.f1).toBe(report.f1);

    const displayed = metricsTableRows(history.evaluations)[0]!;
    expect(displayed[4]).toBe(String(report.f1));
    expect(Number(displayed[4])).toBe(report.f1);

    // prompt preview reflects the two new demonstrations
    const prompt = await client.prompt("ui-flow");
    expect(prompt.demonstration_count).toBe(2);
    expect(prompt.prompt).toContain("Answer:");
  }, 30000);
});
