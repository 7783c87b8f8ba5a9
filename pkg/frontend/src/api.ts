/** Thin client over the optimizer service. At most one optimize request
 * is in flight per session: a new submission cancels the previous one. */

import type {
	CompilersResponse,
	ImportanceResponse,
	OptimizeRequest,
	OptimizeResponse,
	RankingDimension,
	ReliabilityResponse,
} from "./types";

export class ServiceError extends Error {
	constructor(
		message: string,
		public readonly status: number,
	) {
		super(message);
	}
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parse<T>(response: Response): Promise<T> {
	if (!response.ok) {
		let detail = response.statusText;
		try {
			const body = await response.json();
			detail = JSON.stringify(body.detail ?? body);
		} catch {
			/* non-JSON error body */
		}
		throw new ServiceError(detail, response.status);
	}
	return (await response.json()) as T;
}

export class ApiClient {
	private inflight: AbortController | null = null;

	constructor(
		private readonly baseUrl: string = "",
		private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
	) {}

	/** Cancels any in-flight optimize call before starting the new one. */
	async optimize(request: OptimizeRequest): Promise<OptimizeResponse> {
		this.inflight?.abort();
		const controller = new AbortController();
		this.inflight = controller;
		try {
			const response = await this.fetchFn(`${this.baseUrl}/api/optimize`, {
				method: "POST",
				headers: { "content-type": "application/json" },
				body: JSON.stringify(request),
				signal: controller.signal,
			});
			return await parse<OptimizeResponse>(response);
		} finally {
			if (this.inflight === controller) this.inflight = null;
		}
	}

	async reliability(
		request: OptimizeRequest,
		dimension: RankingDimension,
		draws = 1000,
		seed = 0,
	): Promise<ReliabilityResponse> {
		const response = await this.fetchFn(`${this.baseUrl}/api/reliability`, {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify({ request, dimension, draws, seed }),
		});
		return parse<ReliabilityResponse>(response);
	}

	async compilers(): Promise<CompilersResponse> {
		return parse(await this.fetchFn(`${this.baseUrl}/api/compilers`));
	}

	async importance(compilerId: string, version: string): Promise<ImportanceResponse> {
		return parse(
			await this.fetchFn(
				`${this.baseUrl}/api/models/${encodeURIComponent(compilerId)}/${encodeURIComponent(version)}/importance`,
			),
		);
	}
}
