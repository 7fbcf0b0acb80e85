/** Debounced preview scheduling with stale-response discard.
 *
 * Slider drags fire many edits; at most one request goes out per debounce
 * window and only the newest response is ever displayed.
 */

export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private delayMs: number, private fn: () => void) {}

  trigger(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fn();
    }, this.delayMs);
  }

  /** Run now, cancelling any pending trigger. */
  flush(): void {
    this.cancel();
    this.fn();
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}

/** Monotonic ticket counter: a response is shown only if nothing newer
 * has been accepted since its request was issued. */
export class SequenceGate {
  private next = 0;
  private newestAccepted = -1;

  issue(): number {
    return this.next++;
  }

  accept(ticket: number): boolean {
    if (ticket <= this.newestAccepted) return false;
    this.newestAccepted = ticket;
    return true;
  }
}
