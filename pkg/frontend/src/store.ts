/** Annotation batch state: labels, explanations, focus, and the submit
 * guard. Batches are all-or-nothing — a partial batch can never produce a
 * submission payload. */

import type { Label, PendingPair, Submission } from "./types.js";

export interface CardState {
  readonly pair: PendingPair;
  label: Label | null;
  explanation: string;
}

export class BatchStore {
  readonly iteration: number;
  readonly requireExplanation: boolean;
  readonly cards: CardState[];
  focusIndex = 0;
  submitting = false;

  constructor(pending: PendingPair[], iteration: number, requireExplanation: boolean) {
    this.iteration = iteration;
    this.requireExplanation = requireExplanation;
    this.cards = pending.map((pair) => ({ pair, label: null, explanation: "" }));
  }

  card(pairId: string): CardState {
    const found = this.cards.find((card) => card.pair.pair_id === pairId);
    if (!found) throw new Error(`no card for pair ${pairId}`);
    return found;
  }

  setLabel(pairId: string, label: Label): void {
    this.card(pairId).label = label;
  }

  setExplanation(pairId: string, text: string): void {
    this.card(pairId).explanation = text;
  }

  labelFocused(label: Label): void {
    const card = this.cards[this.focusIndex];
    if (card) card.label = label;
  }

  focusNext(): void {
    if (this.focusIndex < this.cards.length - 1) this.focusIndex += 1;
  }

  focusPrevious(): void {
    if (this.focusIndex > 0) this.focusIndex -= 1;
  }

  /** A card is complete once labeled, plus a nonempty explanation when required. */
  cardComplete(card: CardState): boolean {
    if (card.label === null) return false;
    if (this.requireExplanation && card.explanation.trim() === "") return false;
    return true;
  }

  missingCards(): string[] {
    return this.cards.filter((card) => !this.cardComplete(card)).map((card) => card.pair.pair_id);
  }

  canSubmit(): boolean {
    return !this.submitting && this.cards.length > 0 && this.missingCards().length === 0;
  }

  /** Build the atomic submission payload; refuses partial batches. */
  buildSubmissions(): Submission[] {
    const missing = this.missingCards();
    if (missing.length > 0) {
      throw new Error(`batch incomplete: ${missing.join(", ")} still need input`);
    }
    return this.cards.map((card) => {
      const submission: Submission = {
        pair_id: card.pair.pair_id,
        label: card.label as Label,
      };
      const explanation = card.explanation.trim();
      if (explanation !== "") submission.explanation = explanation;
      return submission;
    });
  }
}
