/** Fixed-capacity ring buffer; pushing onto a full buffer evicts the oldest. */
export class RingBuffer<T> {
  readonly capacity: number;
  private items: T[];
  private start = 0;
  private count = 0;

  constructor(capacity: number) {
    if (!Number.isInteger(capacity) || capacity <= 0) {
      throw new RangeError(`capacity must be a positive integer, got ${capacity}`);
    }
    this.capacity = capacity;
    this.items = new Array<T>(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(item: T): void {
    const end = (this.start + this.count) % this.capacity;
    this.items[end] = item;
    if (this.count === this.capacity) {
      this.start = (this.start + 1) % this.capacity; // evict oldest
    } else {
      this.count += 1;
    }
  }

  at(index: number): T {
    if (index < 0 || index >= this.count) {
      throw new RangeError(`index ${index} out of range 0..${this.count - 1}`);
    }
    return this.items[(this.start + index) % this.capacity];
  }

  last(): T | undefined {
    return this.count === 0 ? undefined : this.at(this.count - 1);
  }

  toArray(): T[] {
    const out: T[] = new Array(this.count);
    for (let i = 0; i < this.count; i++) {
      out[i] = this.at(i);
    }
    return out;
  }

  clear(): void {
    this.start = 0;
    this.count = 0;
    this.items = new Array<T>(this.capacity);
  }
}
