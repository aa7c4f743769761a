/**
 * Monotone request ids with a latest-wins rule. A response may only be shown
 * when its id matches the most recently issued one, so replies that arrive
 * out of order (or after the slider moved on) are discarded as stale.
 */
export class RequestSequencer {
  private issued = 0;

  begin(): number {
    this.issued += 1;
    return this.issued;
  }

  isCurrent(id: number): boolean {
    return id === this.issued;
  }

  get latest(): number {
    return this.issued;
  }
}
