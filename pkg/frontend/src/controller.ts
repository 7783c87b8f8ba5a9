/** DOM-free planner logic: owns the session, talks to the service, and
 * pushes rendered HTML fragments into sinks. The DOM layer (app.ts) only
 * wires events to these methods and writes fragments into containers. */

import { ApiClient } from "./api";
import {
	renderBadge,
	renderComparison,
	renderHeatmap,
	renderResults,
} from "./render";
import { PlannerSession } from "./state";
import type {
	ImportanceResponse,
	OptimizeRequest,
	RankingDimension,
	ReliabilityResponse,
} from "./types";

export interface ViewSinks {
	results(html: string): void;
	badge(html: string): void;
	comparison(html: string): void;
	heatmap(html: string): void;
	error(message: string): void;
}

const isAbort = (err: unknown) =>
	err instanceof Error && (err.name === "AbortError" || /abort/i.test(err.message));

export class PlannerController {
	readonly session = new PlannerSession();
	activeDimension: RankingDimension = "dynamic_power";

	private badges = new Map<string, ReliabilityResponse>();

	constructor(
		private readonly client: ApiClient,
		private readonly view: ViewSinks,
	) {}

	/** Submit the current draft; history is preserved across re-submits. */
	async submit(): Promise<void> {
		const request: OptimizeRequest = JSON.parse(JSON.stringify(this.session.draft));
		try {
			const response = await this.client.optimize(request);
			const entry = this.session.record(request, response);
			this.renderActive(entry.id);
		} catch (err) {
			if (isAbort(err)) return; // superseded by a newer submission
			this.view.error(err instanceof Error ? err.message : String(err));
		}
	}

	selectTab(dimension: RankingDimension): void {
		this.activeDimension = dimension;
		const latest = this.session.latest();
		if (latest) this.renderActive(latest.id);
	}

	setWeights(weights: [number, number, number]): void {
		this.session.draft.weights = weights;
	}

	setFrequencyTarget(mhz: number | null): void {
		this.session.draft.frequency_target_mhz = mhz;
	}

	setCorner(dimension: string, corner: string): void {
		this.session.draft.corner_selection[dimension] = corner;
	}

	setFixed(name: string, value: number | string): void {
		this.session.draft.fixed[name] = value;
	}

	private renderActive(historyId: number): void {
		const entry = this.session.find(historyId);
		if (!entry) return;
		this.view.results(
			renderResults(entry.response, entry.request, this.activeDimension, entry.id),
		);
		const badge = this.badges.get(`${historyId}:${this.activeDimension}`) ?? null;
		this.view.badge(renderBadge(badge));
	}

	/** Reliability badge for the active ranking of the latest run. */
	async estimateReliability(draws = 1000): Promise<void> {
		const latest = this.session.latest();
		if (!latest) return;
		this.view.badge(renderBadge(null, true));
		try {
			const report = await this.client.reliability(
				latest.request,
				this.activeDimension,
				draws,
			);
			this.badges.set(`${latest.id}:${this.activeDimension}`, report);
			this.view.badge(renderBadge(report));
		} catch (err) {
			this.view.error(err instanceof Error ? err.message : String(err));
			this.view.badge(renderBadge(null));
		}
	}

	pin(historyId: number, dimension: RankingDimension, rank: number): void {
		try {
			this.session.pin(historyId, dimension, rank);
		} catch (err) {
			this.view.error(err instanceof Error ? err.message : String(err));
			return;
		}
		this.renderComparison();
	}

	unpin(index: number): void {
		this.session.unpin(index);
		this.renderComparison();
	}

	private renderComparison(): void {
		const pins = this.session.pinned;
		if (pins.length < 2) {
			this.view.comparison("");
			return;
		}
		const [pa, pb] = pins.slice(-2);
		const a = this.session.resolveEntry(pa);
		const b = this.session.resolveEntry(pb);
		const request = this.session.find(pb.historyId)?.request;
		if (!a || !b || !request) return;
		this.view.comparison(
			renderComparison(
				{ label: `${pa.dimension} #${pa.rank + 1}`, entry: a },
				{ label: `${pb.dimension} #${pb.rank + 1}`, entry: b },
				request,
			),
		);
	}

	async showImportance(compilerId: string, version: string): Promise<void> {
		try {
			const importance: ImportanceResponse = await this.client.importance(
				compilerId,
				version,
			);
			this.view.heatmap(renderHeatmap(importance));
		} catch (err) {
			this.view.error(err instanceof Error ? err.message : String(err));
		}
	}
}
