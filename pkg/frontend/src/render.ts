/** Pure HTML renderers. The UI computes no PPA itself: every number in
 * the markup comes from a service response field (pinned-comparison
 * deltas are differences of returned values). Exact source values ride
 * along in data-value attributes. */

import type {
	DiagnosticsDoc,
	ImportanceResponse,
	OptimizeRequest,
	OptimizeResponse,
	RankedEntryDoc,
	RankingDimension,
	ReliabilityResponse,
} from "./types";
import { RANKING_DIMENSIONS } from "./types";

export const DIMENSION_LABELS: Record<RankingDimension, string> = {
	dynamic_power: "Dynamic power",
	leakage: "Leakage",
	area: "Area",
	weighted_sum: "Weighted sum",
};

export function escapeHtml(text: string): string {
	return text
		.replace(/&/g, "&amp;")
		.replace(/</g, "&lt;")
		.replace(/>/g, "&gt;")
		.replace(/"/g, "&quot;");
}

/** Compact display form; the exact value lives in data-value. */
export function fmt(value: number): string {
	if (!Number.isFinite(value)) return String(value);
	const magnitude = Math.abs(value);
	if (magnitude !== 0 && (magnitude >= 1e5 || magnitude < 1e-3)) {
		return value.toExponential(3);
	}
	return String(Math.round(value * 1000) / 1000);
}

function cell(value: number, cls = ""): string {
	return `<td class="num ${cls}" data-value="${String(value)}">${fmt(value)}</td>`;
}

function freeParams(entry: RankedEntryDoc, request: OptimizeRequest): string {
	const fixed = new Set(Object.keys(request.fixed));
	return Object.entries(entry.parametrization.values)
		.filter(([name]) => !fixed.has(name))
		.map(([name, value]) => `${escapeHtml(name)}=${escapeHtml(String(value))}`)
		.join(" ");
}

/** The per-entry PPA columns shown next to the ranking criterion. */
export function summaryColumns(request: OptimizeRequest): { label: string; key: string }[] {
	const corners = request.corner_selection;
	return [
		{ label: "area (um2)", key: "area" },
		{ label: `read power @${corners.dynamic_power}`, key: `read_power@${corners.dynamic_power}` },
		{ label: `leakage @${corners.leakage}`, key: `leakage@${corners.leakage}` },
		{ label: `cycle @${corners.cycle_time}`, key: `cycle_time@${corners.cycle_time}` },
	];
}

export function renderRankingTable(
	entries: RankedEntryDoc[],
	dimension: RankingDimension,
	request: OptimizeRequest,
	historyId: number,
	topN = 20,
): string {
	const columns = summaryColumns(request);
	const head =
		`<tr><th>#</th><th>compiler</th><th>free parameters</th>` +
		`<th>${escapeHtml(DIMENSION_LABELS[dimension])}</th>` +
		columns.map((c) => `<th>${escapeHtml(c.label)}</th>`).join("") +
		`<th></th></tr>`;
	const rows = entries.slice(0, topN).map((entry, i) => {
		const p = entry.parametrization;
		return (
			`<tr><td>${i + 1}</td>` +
			`<td>${escapeHtml(p.compiler_id)}@${escapeHtml(p.version)}</td>` +
			`<td class="params">${freeParams(entry, request)}</td>` +
			cell(entry.value, "criterion") +
			columns.map((c) => cell(entry.ppa[c.key])).join("") +
			`<td><button class="pin" data-history="${historyId}" data-dimension="${dimension}" data-rank="${i}">pin</button></td></tr>`
		);
	});
	return `<table class="ranking" data-dimension="${dimension}">${head}${rows.join("")}</table>`;
}

export function renderTabs(active: RankingDimension): string {
	return (
		`<nav class="tabs">` +
		RANKING_DIMENSIONS.map(
			(dim) =>
				`<button class="tab${dim === active ? " active" : ""}" data-dimension="${dim}">` +
				`${escapeHtml(DIMENSION_LABELS[dim])}</button>`,
		).join("") +
		`</nav>`
	);
}

export function renderDiagnostics(diag: DiagnosticsDoc, elapsedSeconds: number): string {
	const skipped = diag.compilers_skipped
		.map((s) => `${escapeHtml(s.compiler_id)}@${escapeHtml(s.version)}`)
		.join(", ");
	return (
		`<p class="diagnostics">` +
		`<span data-value="${diag.candidates_total}">${diag.candidates_total}</span> candidates, ` +
		`<span class="filter-count" data-value="${diag.filtered_by_frequency}">${diag.filtered_by_frequency}</span> removed by frequency filter, ` +
		`<span data-value="${diag.results}">${diag.results}</span> results in ` +
		`<span data-value="${String(elapsedSeconds)}">${fmt(elapsedSeconds)}</span>s` +
		(skipped ? ` &middot; skipped: ${skipped}` : "") +
		`</p>`
	);
}

export function renderEmptyState(diag: DiagnosticsDoc): string {
	return (
		`<div class="empty-state">` +
		`<p>No solution satisfies the requirements.</p>` +
		`<p>All <span data-value="${diag.candidates_total}">${diag.candidates_total}</span> candidates ` +
		`were filtered (<span data-value="${diag.filtered_by_frequency}">${diag.filtered_by_frequency}</span> ` +
		`by the frequency target). Relax the frequency target or widen the fixed parameters.</p>` +
		`</div>`
	);
}

export function renderResults(
	response: OptimizeResponse,
	request: OptimizeRequest,
	active: RankingDimension,
	historyId: number,
): string {
	const diagnostics = renderDiagnostics(response.diagnostics, response.elapsed_seconds);
	if (response.diagnostics.results === 0) {
		return diagnostics + renderEmptyState(response.diagnostics);
	}
	return (
		diagnostics +
		renderTabs(active) +
		renderRankingTable(response.rankings[active], active, request, historyId)
	);
}

export function renderBadge(report: ReliabilityResponse | null, pending = false): string {
	if (pending) return `<span class="badge pending">reliability: &hellip;</span>`;
	if (!report) {
		return `<button class="badge ask" data-action="reliability">estimate reliability</button>`;
	}
	const percent = report.score * 100;
	const grade = report.score >= 0.95 ? "good" : report.score >= 0.7 ? "fair" : "poor";
	return (
		`<span class="badge ${grade}" data-value="${String(report.score)}" ` +
		`title="${report.draws} draws, ${escapeHtml(report.distribution_kinds.join("+"))}">`
		+ `rank-1 stable in ${fmt(percent)}% of resamples</span>`
	);
}

/** Diverging blue/white/red scale over [-1, 1], zero preserved as white. */
export function heatColor(value: number): string {
	const clamped = Math.max(-1, Math.min(1, value));
	const strength = Math.round(Math.abs(clamped) * 255);
	const other = 255 - strength;
	return clamped >= 0
		? `rgb(255, ${other}, ${other})`
		: `rgb(${other}, ${other}, 255)`;
}

export function renderHeatmap(importance: ImportanceResponse): string {
	const head =
		`<tr><th></th>` +
		importance.dimensions.map((d) => `<th>${escapeHtml(d)}</th>`).join("") +
		`</tr>`;
	const rows = importance.feature_names.map((name, r) => {
		const cells = importance.matrix[r]
			.map(
				(value) =>
					`<td class="heat" data-value="${String(value)}" ` +
					`style="background:${heatColor(value)}">${fmt(value)}</td>`,
			)
			.join("");
		const degenerate = importance.degenerate_rows[r] ? ` <em>(no signal)</em>` : "";
		return `<tr><th>${escapeHtml(name)}${degenerate}</th>${cells}</tr>`;
	});
	return `<table class="heatmap">${head}${rows.join("")}</table>`;
}

export interface PinView {
	label: string;
	entry: RankedEntryDoc;
}

/** Side-by-side comparison; deltas are computed from the returned PPA
 * values of the two pinned solutions. */
export function renderComparison(a: PinView, b: PinView, request: OptimizeRequest): string {
	const columns = summaryColumns(request);
	const rows = columns.map(({ label, key }) => {
		const va = a.entry.ppa[key];
		const vb = b.entry.ppa[key];
		const delta = vb - va;
		const sign = delta > 0 ? "+" : "";
		return (
			`<tr><th>${escapeHtml(label)}</th>` +
			cell(va) +
			cell(vb) +
			`<td class="num delta" data-value="${String(delta)}">${sign}${fmt(delta)}</td></tr>`
		);
	});
	const describe = (v: PinView) =>
		`${escapeHtml(v.entry.parametrization.compiler_id)}@${escapeHtml(v.entry.parametrization.version)} (${escapeHtml(v.label)})`;
	return (
		`<table class="compare">` +
		`<tr><th></th><th>${describe(a)}</th><th>${describe(b)}</th><th>delta</th></tr>` +
		rows.join("") +
		`</table>`
	);
}
