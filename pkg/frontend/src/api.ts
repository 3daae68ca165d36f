import type { ServiceInfo, VerifyReport, VerifyRequest } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** Thin same-origin client for the scoring service. */
export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
    private readonly base: string = "",
  ) {}

  config(): Promise<ServiceInfo> {
    return this.get<ServiceInfo>("/config");
  }

  verify(request: VerifyRequest): Promise<VerifyReport> {
    return this.post<VerifyReport>("/verify", request);
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    return this.decode<T>(response);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return this.decode<T>(response);
  }

  private async decode<T>(response: Response): Promise<T> {
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json() as Promise<T>;
  }
}
