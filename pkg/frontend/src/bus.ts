// Selection broadcast between views: synchronous, registration order,
// listener failures counted but never blocking.

import type { Selection } from "./types.js";

export type EventKind = "picking" | "click" | "brush";

type Listener = (selection: Selection) => void;

export class SelectionBus {
  private listeners: Array<[EventKind, Listener]> = [];
  listenerErrors = 0;

  addListener(kind: EventKind, listener: Listener): void {
    this.listeners.push([kind, listener]);
  }

  emit(kind: EventKind, selection: Selection): void {
    for (const [listenerKind, listener] of this.listeners) {
      if (listenerKind !== kind) continue;
      try {
        listener(selection);
      } catch {
        this.listenerErrors += 1;
      }
    }
  }
}
