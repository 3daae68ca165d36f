import type { FetchLike } from "../src/api.js";
import type { ServiceInfo, VerifyReport } from "../src/types.js";

/** Wire payloads captured from the real service running on mock providers. */
export const SERVICE_INFO: ServiceInfo = {
  weights: {
    lexical: 0.3333333333333333,
    semantic: 0.3333333333333333,
    self_eval: 0.3333333333333333,
  },
  levels: 10,
  mock_providers: true,
};

export function echoVerifyReport(knowledge: string, tag: number): VerifyReport {
  // Shape of /verify when generation echoes the knowledge passage.
  return {
    response: knowledge,
    breakdown: {
      lexical: 1.0,
      semantic: 1.0,
      self_eval: 1.0,
      weights: SERVICE_INFO.weights,
      final: 1.0,
    },
    measured_tag: 10,
    deviation: Math.abs(10 - tag),
  };
}

export interface RecordedCall {
  path: string;
  body: unknown;
}

export interface StubOptions {
  configFails?: boolean;
  verifyStatus?: number;
  verifyDetail?: string;
  verifyReport?: (body: { knowledge: string; tag: number }) => VerifyReport;
  delayVerify?: () => Promise<void>;
}

/** fetch stand-in speaking the service's /config and /verify contract. */
export function stubFetch(calls: RecordedCall[], options: StubOptions = {}): FetchLike {
  return async (input: string, init?: RequestInit): Promise<Response> => {
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ path: input, body });
    if (input.endsWith("/config")) {
      if (options.configFails) throw new TypeError("fetch failed");
      return jsonResponse(200, SERVICE_INFO);
    }
    if (input.endsWith("/verify")) {
      if (options.delayVerify) await options.delayVerify();
      if (options.verifyStatus && options.verifyStatus !== 200) {
        return new Response(options.verifyDetail ?? "error", {
          status: options.verifyStatus,
        });
      }
      const report = options.verifyReport
        ? options.verifyReport(body)
        : echoVerifyReport(body.knowledge, body.tag);
      return jsonResponse(200, report);
    }
    return new Response("not found", { status: 404 });
  };
}

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
