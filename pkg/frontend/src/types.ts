export interface FusionWeights {
  lexical: number;
  semantic: number;
  self_eval: number;
}

export interface Breakdown {
  lexical: number;
  semantic: number | null;
  self_eval: number | null;
  weights: FusionWeights;
  final: number;
}

export interface ServiceInfo {
  weights: FusionWeights;
  levels: number;
  mock_providers?: boolean;
}

export interface VerifyRequest {
  knowledge: string;
  context: string;
  tag: number;
  temperature?: number;
}

export interface VerifyReport {
  response: string;
  breakdown: Breakdown;
  measured_tag: number;
  deviation: number;
}

/** One submission in the session history. Score fields are copied verbatim
 * from the server report; the client never recomputes any of them. */
export interface SessionEntry {
  id: string;
  requestedTag: number;
  context: string;
  knowledge: string;
  response: string;
  breakdown: Breakdown;
  measuredTag: number;
  deviation: number;
  timestamp: string;
}
