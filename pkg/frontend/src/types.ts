// Wire types mirroring the service's JSON API.

export interface CorpusInfo {
  count: number;
  dim: number;
}

export interface HealthResponse {
  status: string;
  corpus: CorpusInfo;
}

export interface VocabularyResponse {
  texts: string[];
  attributes: Record<string, string[]>;
}

export type MethodName = "text_only" | "image_only" | "average" | "weicom";

export interface RetrieveRequest {
  query_image_id?: string;
  query_image_embedding?: number[];
  query_text?: string;
  query_text_embedding?: number[];
  method: MethodName;
  lambda: number;
  k?: number;
  exclude_query_image?: boolean;
}

export interface RetrieveResult {
  rank: number;
  id: string;
  score: number;
  class: string;
  attributes: Record<string, string>;
}

export interface RetrieveResponse {
  results: RetrieveResult[];
  method: string;
  lambda: number;
  k: number;
  exclude_query_image: boolean;
}
