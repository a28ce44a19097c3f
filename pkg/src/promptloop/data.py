"""Pool and evaluation-set input: line-delimited JSON, one pair per line.

Each line carries ``id``, ``left`` and ``right`` attribute maps, and an
optional ``gold`` label. Attribute order inside a record is preserved from
the file, since it drives prompt rendering.
"""

from __future__ import annotations

import json
from pathlib import Path

from .core import EntityPair, EntityRecord, SamplingPool
from .errors import ValidationError


def pair_from_dict(raw: dict, *, where: str = "") -> EntityPair:
    context = f" ({where})" if where else ""
    try:
        pair_id = raw["id"]
        left = raw["left"]
        right = raw["right"]
    except KeyError as exc:
        raise ValidationError(f"pair record missing field {exc}{context}") from None
    if not isinstance(left, dict) or not isinstance(right, dict):
        raise ValidationError(f"left/right must be attribute maps{context}")
    gold = raw.get("gold")
    if gold is not None and gold not in (0, 1):
        raise ValidationError(f"gold must be 0 or 1, got {gold!r}{context}")
    return EntityPair(
        id=str(pair_id),
        left=EntityRecord({str(k): str(v) for k, v in left.items()}),
        right=EntityRecord({str(k): str(v) for k, v in right.items()}),
        gold=gold,
    )


def pair_to_dict(pair: EntityPair) -> dict:
    raw: dict = {
        "id": pair.id,
        "left": dict(pair.left.attributes),
        "right": dict(pair.right.attributes),
    }
    if pair.gold is not None:
        raw["gold"] = pair.gold
    return raw


def load_pairs_jsonl(path: str | Path, *, require_gold: bool = False) -> SamplingPool:
    """Read a pool file; with ``require_gold`` every pair must be labeled."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read pairs file {path}: {exc}") from exc
    pairs: list[EntityPair] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad JSON on line {lineno} of {path}: {exc}") from exc
        pair = pair_from_dict(raw, where=f"{path}:{lineno}")
        if require_gold and pair.gold is None:
            raise ValidationError(f"missing gold label for pair {pair.id!r} ({path}:{lineno})")
        pairs.append(pair)
    if not pairs:
        raise ValidationError(f"no pairs found in {path}")
    return SamplingPool(pairs)


def dump_pairs_jsonl(pool: SamplingPool, path: str | Path) -> None:
    path = Path(path)
    lines = [json.dumps(pair_to_dict(pair), ensure_ascii=False) for pair in pool.pairs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
