/** Thin client for the annotation service /v1 endpoints. */

import { NextTaskResponse, RatingBody, SubmitResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

/** 409: this item already has a rating; safe to drop the local copy. */
export class DuplicateError extends ApiError {}

/** Transport failure: the rating should be queued and retried. */
export class NetworkError extends Error {}

export interface ApiClient {
  nextTask(evaluator: string): Promise<NextTaskResponse>;
  submitRating(body: RatingBody): Promise<SubmitResponse>;
  progress(): Promise<unknown>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export function createClient(baseUrl: string, fetchFn?: FetchLike): ApiClient {
  const doFetch: FetchLike = fetchFn ?? ((input, init) => fetch(input, init));
  const root = baseUrl.replace(/\/$/, "");

  async function request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await doFetch(`${root}${path}`, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (response.status === 409) {
      throw new DuplicateError(409, await parseError(response));
    }
    if (!response.ok) {
      throw new ApiError(response.status, await parseError(response));
    }
    return response;
  }

  return {
    async nextTask(evaluator: string): Promise<NextTaskResponse> {
      const response = await request(
        `/v1/tasks/next?evaluator=${encodeURIComponent(evaluator)}`,
      );
      return (await response.json()) as NextTaskResponse;
    },

    async submitRating(body: RatingBody): Promise<SubmitResponse> {
      const response = await request("/v1/ratings", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      return (await response.json()) as SubmitResponse;
    },

    async progress(): Promise<unknown> {
      const response = await request("/v1/progress");
      return response.json();
    },
  };
}
