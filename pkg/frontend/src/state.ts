/** Client-side planner session: request draft, append-only history of
 * submitted runs, and pinned solutions for side-by-side comparison.
 * Nothing is persisted server-side. */

import type {
	OptimizeRequest,
	OptimizeResponse,
	RankedEntryDoc,
	RankingDimension,
} from "./types";

export interface HistoryEntry {
	id: number;
	request: OptimizeRequest;
	response: OptimizeResponse;
}

/** A pin references a result inside an existing history entry. */
export interface Pin {
	historyId: number;
	dimension: RankingDimension;
	rank: number; // 0-based position in that ranking
}

export function defaultRequest(): OptimizeRequest {
	return {
		schema_version: 1,
		port_config: "1rw",
		fixed: { word_depth: 1024, word_width: 32 },
		corner_selection: {
			dynamic_power: "typ",
			leakage: "typ",
			access_time: "typ",
			cycle_time: "typ",
		},
		frequency_target_mhz: null,
		weights: [1, 1, 1],
		dynamic_metric: "read",
	};
}

const clone = <T>(value: T): T => JSON.parse(JSON.stringify(value)) as T;

export class PlannerSession {
	draft: OptimizeRequest = defaultRequest();

	private entries: HistoryEntry[] = [];
	private pins: Pin[] = [];
	private nextId = 1;

	get history(): readonly HistoryEntry[] {
		return this.entries;
	}

	get pinned(): readonly Pin[] {
		return this.pins;
	}

	/** Appends a completed run; history is append-only within a session. */
	record(request: OptimizeRequest, response: OptimizeResponse): HistoryEntry {
		const entry: HistoryEntry = { id: this.nextId++, request: clone(request), response };
		this.entries.push(entry);
		return entry;
	}

	latest(): HistoryEntry | null {
		return this.entries.length ? this.entries[this.entries.length - 1] : null;
	}

	find(id: number): HistoryEntry | null {
		return this.entries.find((e) => e.id === id) ?? null;
	}

	/** Pins must reference an existing result; invalid references throw. */
	pin(historyId: number, dimension: RankingDimension, rank: number): Pin {
		if (this.resolveEntry({ historyId, dimension, rank }) === null) {
			throw new Error(`cannot pin: no result at ${dimension}#${rank} of run ${historyId}`);
		}
		const pin: Pin = { historyId, dimension, rank };
		this.pins.push(pin);
		return pin;
	}

	unpin(index: number): void {
		this.pins.splice(index, 1);
	}

	resolveEntry(pin: Pin): RankedEntryDoc | null {
		const entry = this.find(pin.historyId);
		const ranking = entry?.response.rankings[pin.dimension];
		return ranking?.[pin.rank] ?? null;
	}
}
