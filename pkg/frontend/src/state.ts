/** View state shared by the controls and both renderers.
 *
 *  Concurrent fetches are allowed; every async update claims a ticket and
 *  only the most recently claimed ticket may commit, so a slow response
 *  for an old selection can never clobber a newer one. */

export type ViewKind = "tree" | "major";

export interface HoverTarget {
  kind: "tree-node" | "course";
  id: string;
}

export interface ViewState {
  view: ViewKind;
  major: string | null;
  threshold: number;
  thresholdFloor: number;
  coreCount: number;
  anchor: string | null;
  hovered: HoverTarget | null;
}

export function initialState(): ViewState {
  return {
    view: "tree",
    major: null,
    threshold: 0,
    thresholdFloor: 0,
    coreCount: 6,
    anchor: null,
    hovered: null,
  };
}

export class Store {
  private state: ViewState;
  private ticket = 0;
  private committed = 0;
  private listeners: Array<(s: ViewState) => void> = [];

  constructor(state: ViewState = initialState()) {
    this.state = state;
  }

  get(): ViewState {
    return this.state;
  }

  subscribe(fn: (s: ViewState) => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }

  /** Synchronous update; clamped to the state invariants. */
  update(patch: Partial<ViewState>): ViewState {
    this.state = clamp({ ...this.state, ...patch });
    for (const fn of this.listeners) fn(this.state);
    return this.state;
  }

  /** Claim a ticket for an async update. */
  begin(): number {
    this.ticket += 1;
    return this.ticket;
  }

  /** Commit an async result; a ticket older than one already committed
   *  loses and changes nothing. */
  commit(ticket: number, patch: Partial<ViewState>): boolean {
    if (ticket <= this.committed) return false;
    this.committed = ticket;
    this.update(patch);
    return true;
  }
}

function clamp(state: ViewState): ViewState {
  const threshold = Math.max(state.threshold, state.thresholdFloor);
  const coreCount = Math.max(1, Math.floor(state.coreCount));
  if (threshold === state.threshold && coreCount === state.coreCount) {
    return state;
  }
  return { ...state, threshold, coreCount };
}
