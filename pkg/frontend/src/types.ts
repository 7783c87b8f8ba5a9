/** Service schema types; these mirror docs/FORMATS.md exactly. */

export type RankingDimension = "dynamic_power" | "leakage" | "area" | "weighted_sum";

export const RANKING_DIMENSIONS: RankingDimension[] = [
	"dynamic_power",
	"leakage",
	"area",
	"weighted_sum",
];

export interface OptimizeRequest {
	schema_version: number;
	port_config: string;
	fixed: Record<string, number | string>;
	corner_selection: Record<string, string>;
	frequency_target_mhz: number | null;
	weights: [number, number, number];
	dynamic_metric: "read" | "max_rw";
}

export interface ParametrizationDoc {
	compiler_id: string;
	version: string;
	values: Record<string, number | string>;
}

export interface RankedEntryDoc {
	parametrization: ParametrizationDoc;
	ppa: Record<string, number>;
	value: number;
}

export interface SkippedCompiler {
	compiler_id: string;
	version: string;
	reason: string;
}

export interface DiagnosticsDoc {
	candidates_total: number;
	filtered_by_frequency: number;
	results: number;
	compilers_skipped: SkippedCompiler[];
	per_spec_counts: Record<string, number>;
	corner_selection: Record<string, string>;
	weights: number[];
	dynamic_metric: string;
}

export interface OptimizeResponse {
	schema_version: number;
	rankings: Record<RankingDimension, RankedEntryDoc[]>;
	diagnostics: DiagnosticsDoc;
	elapsed_seconds: number;
	dimension_scalers?: {
		mean: Record<string, number>;
		std: Record<string, number>;
		provenance: string[];
	};
}

export interface ReliabilityResponse {
	schema_version?: number;
	dimension: string;
	score: number;
	draws: number;
	distribution_kinds: string[];
}

export interface ImportanceResponse {
	schema_version: number;
	feature_names: string[];
	dimensions: string[];
	matrix: number[][];
	degenerate_rows: boolean[];
}

export interface CompilerEntry {
	compiler_id: string;
	version: string;
	spec: {
		port_config: string;
		corners: { name: string }[];
		arch_params: { name: string; choices: (number | string)[] }[];
		depth_values: number[];
		width_values: number[];
	} | null;
}

export interface CompilersResponse {
	schema_version: number;
	compilers: CompilerEntry[];
}
