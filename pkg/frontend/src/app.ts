/** DOM glue: binds the requirement form and result containers to the
 * controller. All rendering goes through the pure functions in render.ts. */

import { ApiClient } from "./api";
import { PlannerController, ViewSinks } from "./controller";
import type { RankingDimension } from "./types";

function el<T extends HTMLElement>(id: string): T {
	const node = document.getElementById(id);
	if (!node) throw new Error(`missing element #${id}`);
	return node as T;
}

export function bootstrap(baseUrl = ""): PlannerController {
	const sinks: ViewSinks = {
		results: (html) => (el("results").innerHTML = html),
		badge: (html) => (el("badge").innerHTML = html),
		comparison: (html) => (el("comparison").innerHTML = html),
		heatmap: (html) => (el("heatmap").innerHTML = html),
		error: (message) => {
			const box = el("error");
			box.textContent = message;
			box.classList.add("visible");
			setTimeout(() => box.classList.remove("visible"), 6000);
		},
	};
	const controller = new PlannerController(new ApiClient(baseUrl), sinks);

	const form = el<HTMLFormElement>("request-form");
	form.addEventListener("submit", (event) => {
		event.preventDefault();
		const data = new FormData(form);
		const draft = controller.session.draft;
		draft.port_config = String(data.get("port_config") ?? "1rw");
		draft.fixed = {
			word_depth: Number(data.get("word_depth")),
			word_width: Number(data.get("word_width")),
		};
		const extra = String(data.get("fixed_extra") ?? "").trim();
		for (const pair of extra.split(/\s+/).filter(Boolean)) {
			const [name, raw] = pair.split("=");
			if (name && raw !== undefined) {
				draft.fixed[name] = /^-?\d+$/.test(raw) ? Number(raw) : raw;
			}
		}
		const corner = String(data.get("corner") ?? "typ");
		for (const dim of ["dynamic_power", "leakage", "access_time", "cycle_time"]) {
			controller.setCorner(dim, corner);
		}
		const freq = String(data.get("frequency") ?? "").trim();
		controller.setFrequencyTarget(freq ? Number(freq) : null);
		controller.setWeights([
			Number(data.get("w_dynamic") ?? 1),
			Number(data.get("w_leakage") ?? 1),
			Number(data.get("w_area") ?? 1),
		]);
		void controller.submit();
	});

	el("results").addEventListener("click", (event) => {
		const target = event.target as HTMLElement;
		if (target.matches("button.tab")) {
			controller.selectTab(target.dataset.dimension as RankingDimension);
		} else if (target.matches("button.pin")) {
			controller.pin(
				Number(target.dataset.history),
				target.dataset.dimension as RankingDimension,
				Number(target.dataset.rank),
			);
		}
	});

	el("badge").addEventListener("click", (event) => {
		const target = event.target as HTMLElement;
		if (target.matches("[data-action=reliability]")) {
			void controller.estimateReliability();
		}
	});

	el<HTMLButtonElement>("load-importance").addEventListener("click", () => {
		const picker = el<HTMLSelectElement>("compiler-picker");
		const [compilerId, version] = picker.value.split("@");
		if (compilerId && version) void controller.showImportance(compilerId, version);
	});

	void new ApiClient(baseUrl).compilers().then((body) => {
		const picker = el<HTMLSelectElement>("compiler-picker");
		picker.innerHTML = body.compilers
			.map(
				(c) =>
					`<option value="${c.compiler_id}@${c.version}">${c.compiler_id}@${c.version}</option>`,
			)
			.join("");
	});

	return controller;
}
