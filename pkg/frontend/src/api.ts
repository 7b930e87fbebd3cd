/**
 * Typed HTTP client for the delaylab service.
 *
 * The shapes below mirror the service's published response schemas; the UI
 * never computes any of these numbers itself, it only displays what the
 * service returns.  Each panel of the cockpit owns one request slot: firing
 * a new request for a panel aborts the one still in flight, so a panel can
 * never show the answer to a question that is no longer being asked.
 */

/** Quasipolynomial coefficients as serialized by the service. */
export interface QpPayload {
  n: number;
  m: number;
  a: number[];
  b: number[];
  tau: number;
}

/** Echo of a catalog system resolved server-side from id + parameters. */
export interface SystemPayload {
  id: string;
  params: Record<string, number>;
  derived: { a: number[]; m: number; n: number; [extra: string]: unknown };
  gain_names: string[];
}

/** One placement branch: the designed feedback and its diagnostics. */
export interface SolutionPayload {
  s0: number;
  tau: number;
  b: number[];
  residuals: number[];
  qp: QpPayload;
  multiplicity: number;
  condition: number;
  /** Physical gains; null when the delay is physically unrealizable. */
  gains?: Record<string, number> | null;
}

export interface ControlMidPayload {
  solutions: SolutionPayload[];
  system?: SystemPayload;
}

export interface AdmissibilityPayload {
  s0_values: number[];
  tau_values: number[];
  /** values[i][j] is the criterion at (s0_values[i], tau_values[j]). */
  values: number[][];
  /** Zero-level curves as lists of [s0, tau] vertices. */
  curves: [number, number][][];
  curve_tol: number;
  system?: SystemPayload;
}

export interface RootPayload {
  re: number;
  im: number;
  multiplicity: number;
  residual: number;
  converged: boolean;
}

export interface SpectrumPayload {
  window: { x_min: number; x_max: number; y_max: number };
  roots: RootPayload[];
  abscissa: number | null;
  total_count: number;
  certified: boolean;
  certified_count: number;
}

export interface SensitivityBranch {
  re: number[];
  im: number[];
  converged: boolean[];
}

export interface SensitivityPayload {
  taus: number[];
  re: number[][];
  im: number[][];
  converged: boolean[][];
  s0: number;
  base_tau: number;
  branches: SensitivityBranch[];
}

export interface SimulationPayload {
  t: number[];
  y: number[];
  final_state: number[];
  decay_estimate: number | null;
}

export interface HealthPayload {
  status: "ok";
  version: string;
}

export interface ExampleInfo {
  params: Record<string, { default: number; unit: string; meaning: string }>;
  derived: { a: number[]; m: number; n: number; [extra: string]: unknown };
  gains: string[];
}

export type ExamplesPayload = Record<string, ExampleInfo>;

/** Request bodies accepted by the placement and exploration endpoints. */
export interface SystemRequest {
  a?: number[];
  m?: number;
  example?: string;
  params?: Record<string, number>;
}

export interface ControlMidRequest extends SystemRequest {
  tau?: number;
  s0?: number;
  branch?: "rightmost" | "smallest" | "all";
}

export interface AdmissibilityRequest extends SystemRequest {
  s0_min: number;
  tau_max: number;
  ns0?: number;
  ntau?: number;
}

export interface SpectrumRequest {
  qp: QpPayload;
  window: { x_min: number; x_max: number; y_max: number };
  grid?: [number, number];
}

export interface SensitivityRequest {
  qp: QpPayload;
  s0: number;
  span?: number;
  steps?: number;
}

export interface SimulateRequest {
  qp: QpPayload;
  history: { kind: string; data: number[] };
  T: number;
  h: number;
  window?: [number, number];
}

export interface ReportRequest {
  selection: string[];
  payloads: Record<string, unknown>;
  format: "json" | "html";
  title?: string;
  timestamp?: string;
}

export interface ReportDownload {
  text: string;
  contentType: string;
}

/** Error envelope the service attaches to every failed request. */
export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}

/** A failed service call, carrying the service's own error code. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.code = body.code;
    this.status = status;
    this.detail = body.detail ?? null;
  }
}

/** True when a rejection only means the request was superseded. */
export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

/** Request slots: one in-flight request per cockpit panel. */
export type PanelSlot =
  | "admissibility"
  | "placement"
  | "spectrum"
  | "sensitivity"
  | "simulation"
  | "report";

export class Client {
  private readonly base: string;
  private readonly fetchImpl: typeof fetch;
  private readonly inflight = new Map<PanelSlot, AbortController>();

  constructor(baseUrl = "", fetchImpl?: typeof fetch) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? fetch.bind(globalThis);
  }

  /** GET without a panel slot; health checks never cancel anything. */
  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.base + path);
    return unwrapJson<T>(res);
  }

  private async post<T>(slot: PanelSlot, path: string, body: unknown): Promise<T> {
    const res = await this.postRaw(slot, path, body);
    return unwrapJson<T>(res);
  }

  /** POST JSON, aborting whatever the same panel had in flight. */
  private async postRaw(slot: PanelSlot, path: string, body: unknown): Promise<Response> {
    this.inflight.get(slot)?.abort();
    const controller = new AbortController();
    this.inflight.set(slot, controller);
    try {
      return await this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } finally {
      if (this.inflight.get(slot) === controller) {
        this.inflight.delete(slot);
      }
    }
  }

  health(): Promise<HealthPayload> {
    return this.get("/api/v1/health");
  }

  examples(): Promise<ExamplesPayload> {
    return this.get("/api/v1/examples");
  }

  admissibility(req: AdmissibilityRequest): Promise<AdmissibilityPayload> {
    return this.post("admissibility", "/api/v1/admissibility", req);
  }

  controlMid(req: ControlMidRequest): Promise<ControlMidPayload> {
    return this.post("placement", "/api/v1/placement/control-mid", req);
  }

  spectrum(req: SpectrumRequest): Promise<SpectrumPayload> {
    return this.post("spectrum", "/api/v1/spectrum", req);
  }

  sensitivity(req: SensitivityRequest): Promise<SensitivityPayload> {
    return this.post("sensitivity", "/api/v1/sensitivity", req);
  }

  simulate(req: SimulateRequest): Promise<SimulationPayload> {
    return this.post("simulation", "/api/v1/simulate", req);
  }

  /** The report endpoint returns a document, not JSON to display. */
  async report(req: ReportRequest): Promise<ReportDownload> {
    const res = await this.postRaw("report", "/api/v1/report", req);
    if (!res.ok) {
      throw new ApiError(res.status, await errorBody(res));
    }
    return {
      text: await res.text(),
      contentType: res.headers.get("content-type") ?? "application/octet-stream",
    };
  }
}

async function unwrapJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    throw new ApiError(res.status, await errorBody(res));
  }
  return (await res.json()) as T;
}

async function errorBody(res: Response): Promise<ApiErrorBody> {
  try {
    const body = (await res.json()) as ApiErrorBody;
    if (typeof body.code === "string" && typeof body.message === "string") {
      return body;
    }
  } catch {
    // fall through to the generic envelope
  }
  return { code: "http_error", message: `request failed with status ${res.status}` };
}
