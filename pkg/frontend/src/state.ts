// Client-side game state: a mirror of the server envelope plus purely
// local concerns (wager selection, cumulative click heatmap, the
// net-vs-classical series, the current guess selection). Spent always
// comes from the server ledger; the client never recomputes it.

import type { Envelope, GuessResult, PlayResult } from './api'

export interface ChartPoint {
  play: number
  spent: number
  classical: number
}

export interface GameState {
  sessionId: string
  seed: number
  n: number
  m: number
  state: 'open' | 'won' | 'lost'
  spent: number
  classical: number
  plays: { intensity: number; clickedBins: number[] }[]
  heatmap: number[] // per-bin cumulative click counts, index 0 = bin 1
  series: ChartPoint[]
  selectedIntensity: number
  selectedBins: Set<number>
  payoff?: number
  net?: number
  revealedMissing?: number[]
}

export const INTENSITY_PRESETS = [0.5, 2.5, 4.5]

function emptyHeatmap(n: number): number[] {
  return new Array(n).fill(0)
}

function accumulate(heatmap: number[], clicked: number[]): void {
  for (const bin of clicked) {
    if (bin >= 1 && bin <= heatmap.length) heatmap[bin - 1] += 1
  }
}

/** Build the whole state from a server envelope; the only constructor,
 * so a page refresh restores exactly what GET /games/{id} returns. */
export function fromEnvelope(env: Envelope, selectedIntensity = 2.5): GameState {
  const heatmap = emptyHeatmap(env.n)
  const series: ChartPoint[] = [{ play: 0, spent: 0, classical: env.classical_resources }]
  let spent = 0
  env.plays.forEach((p, index) => {
    accumulate(heatmap, p.clicked_bins)
    spent += p.intensity * env.n * Math.log2(env.n)
    series.push({ play: index + 1, spent, classical: env.classical_resources })
  })
  return {
    sessionId: env.session_id,
    seed: env.seed,
    n: env.n,
    m: env.m,
    state: env.state,
    spent: env.spent,
    classical: env.classical_resources,
    plays: env.plays.map((p) => ({ intensity: p.intensity, clickedBins: [...p.clicked_bins] })),
    heatmap,
    series,
    selectedIntensity,
    selectedBins: new Set(),
    payoff: env.payoff,
    net: env.net,
    revealedMissing: env.revealed_missing ? [...env.revealed_missing] : undefined,
  }
}

export function applyPlay(state: GameState, result: PlayResult, intensity: number): GameState {
  const heatmap = [...state.heatmap]
  accumulate(heatmap, result.clicked_bins)
  const plays = [...state.plays, { intensity, clickedBins: [...result.clicked_bins] }]
  return {
    ...state,
    spent: result.spent,
    plays,
    heatmap,
    series: [
      ...state.series,
      { play: plays.length, spent: result.spent, classical: state.classical },
    ],
  }
}

export function applyGuess(state: GameState, result: GuessResult): GameState {
  return {
    ...state,
    state: result.state,
    payoff: result.payoff,
    net: result.net,
    revealedMissing: [...result.revealed_missing],
  }
}

export function toggleBin(state: GameState, bin: number): GameState {
  if (state.state !== 'open' || bin < 1 || bin > state.n) return state
  const selected = new Set(state.selectedBins)
  if (selected.has(bin)) {
    selected.delete(bin)
  } else {
    selected.add(bin)
  }
  return { ...state, selectedBins: selected }
}

export function setIntensity(state: GameState, intensity: number): GameState {
  if (!(intensity >= 0) || !Number.isFinite(intensity)) return state
  return { ...state, selectedIntensity: intensity }
}

/** The guess button is enabled only when exactly m bins are selected. */
export function canSubmitGuess(state: GameState): boolean {
  return state.state === 'open' && state.selectedBins.size === state.m
}

/** Net if the current guess were right: reward minus spend so far. */
export function projectedNet(state: GameState): number {
  return state.classical - state.spent
}

/** Price of the next play at the chosen wager, for display only. */
export function nextPlayPrice(state: GameState): number {
  return state.n * state.selectedIntensity * Math.log2(state.n)
}
