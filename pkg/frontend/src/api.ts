// Typed client for the blind-box game service. Every UI action maps to
// exactly one of these calls; errors carry the server's message verbatim.

export interface PlayView {
  intensity: number
  clicked_bins: number[]
}

export interface Envelope {
  session_id: string
  seed: number
  n: number
  m: number
  eta: number
  dark: number
  vis: number
  state: 'open' | 'won' | 'lost'
  spent: number
  classical_resources: number
  plays: PlayView[]
  payoff?: number
  net?: number
  revealed_missing?: number[]
}

export interface PlayResult {
  session_id: string
  clicked_bins: number[]
  spent: number
  plays: number
}

export interface GuessResult {
  session_id: string
  state: 'won' | 'lost'
  payoff: number
  net: number
  revealed_missing: number[]
}

export interface CreateRequest {
  n: number
  m: number
  eta: number
  dark: number
  vis: number
  seed?: number
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message)
  }
}

declare global {
  interface Window {
    QCOUPON_API?: string
  }
}

export function apiBase(): string {
  if (typeof window !== 'undefined') {
    const param = new URLSearchParams(window.location.search).get('api')
    if (param) return param.replace(/\/$/, '')
    if (window.QCOUPON_API) return window.QCOUPON_API.replace(/\/$/, '')
  }
  return 'http://127.0.0.1:8077'
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  let resp: Response
  try {
    resp = await fetch(apiBase() + path, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    })
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`)
  }
  const text = await resp.text()
  let parsed: unknown = {}
  if (text) {
    try {
      parsed = JSON.parse(text)
    } catch {
      parsed = { error: text }
    }
  }
  if (!resp.ok) {
    const message =
      typeof parsed === 'object' && parsed !== null && 'error' in parsed
        ? String((parsed as { error: unknown }).error)
        : `${resp.status} ${resp.statusText}`
    throw new ApiError(resp.status, message)
  }
  return parsed as T
}

export function createGame(req: CreateRequest): Promise<Envelope> {
  return request<Envelope>('POST', '/games', req)
}

export function getGame(sessionId: string): Promise<Envelope> {
  return request<Envelope>('GET', `/games/${encodeURIComponent(sessionId)}`)
}

export function play(sessionId: string, intensity: number): Promise<PlayResult> {
  return request<PlayResult>('POST', `/games/${encodeURIComponent(sessionId)}/plays`, {
    intensity,
  })
}

export function guess(sessionId: string, missing: number[]): Promise<GuessResult> {
  return request<GuessResult>('POST', `/games/${encodeURIComponent(sessionId)}/guess`, {
    missing,
  })
}
