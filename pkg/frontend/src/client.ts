// Thin typed wrapper over the rectification service. Field names follow the
// wire schema, hence the snake_case.

export interface RectifyRequestBody {
  image: string;
  degree?: number;
  blend?: number[];
  return_metrics?: boolean;
  gt?: string;
}

export interface RectifyResponseBody {
  image: string;
  blend: number[];
  checkpoint_id: string;
  latency_ms: number;
  psnr?: number | string;
  ssim?: number | string;
}

export interface HealthBody {
  status: string;
  checkpoint_id: string;
  uptime_s: number;
}

export interface QueriesBody {
  count: number;
  shape: number[];
  degree_labels: number[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = `http_${resp.status}`;
  let message = resp.statusText || code;
  try {
    const body = (await resp.json()) as { error?: { code?: string; message?: string } };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body, keep the status-derived code
  }
  throw new ServiceError(resp.status, code, message);
}

export class TunerClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  health(): Promise<HealthBody> {
    return this.fetchImpl(`${this.baseUrl}/health`).then((r) => unwrap<HealthBody>(r));
  }

  queries(): Promise<QueriesBody> {
    return this.fetchImpl(`${this.baseUrl}/queries`).then((r) => unwrap<QueriesBody>(r));
  }

  rectify(body: RectifyRequestBody): Promise<RectifyResponseBody> {
    return this.fetchImpl(`${this.baseUrl}/rectify`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => unwrap<RectifyResponseBody>(r));
  }
}
