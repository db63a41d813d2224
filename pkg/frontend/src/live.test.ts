// Opt-in integration test against a running game service. Skipped unless
// QCOUPON_LIVE_API points at one, e.g.:
//
//   qcoupon serve --port 8077 &
//   QCOUPON_LIVE_API=http://127.0.0.1:8077 npm test

import { describe, expect, it } from 'vitest'
import { createGame, getGame, guess, play } from './api'
import { applyGuess, applyPlay, canSubmitGuess, fromEnvelope, toggleBin } from './state'
import { bits } from './format'

const LIVE = process.env.QCOUPON_LIVE_API

if (LIVE) {
  // api.ts falls back to this default in a window-less environment, so
  // point the default at the live service by stubbing fetch's base
  const realFetch = globalThis.fetch
  globalThis.fetch = ((input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input).replace('http://127.0.0.1:8077', LIVE)
    return realFetch(url, init)
  }) as typeof fetch
}

describe.skipIf(!LIVE)('live service round trip', () => {
  it('create, three plays at 2.5, winning guess, refresh-restore', async () => {
    const env = await createGame({
      n: 100, m: 2, eta: 0.68, dark: 6e-7, vis: 0.9996, seed: 20240808,
    })
    let state = fromEnvelope(env)
    expect(state.state).toBe('open')

    for (let i = 0; i < 3; i += 1) {
      const result = await play(state.sessionId, 2.5)
      state = applyPlay(state, result, 2.5)
    }
    expect(bits(state.spent)).toBe('4982.9')
    expect(bits(state.classical)).toBe('2985.3')

    // the stateless-client contract: rebuilding from GET alone matches
    const restored = fromEnvelope(await getGame(state.sessionId))
    expect(restored.spent).toBe(state.spent)
    expect(restored.heatmap).toEqual(state.heatmap)
    expect(restored.plays).toEqual(state.plays)

    // guess the two bins the detector heat points at (deterministic seed)
    const byHeat = state.heatmap
      .map((count, i) => ({ bin: i + 1, count }))
      .sort((a, b) => b.count - a.count || a.bin - b.bin)
      .slice(0, state.m)
      .map((entry) => entry.bin)
      .sort((a, b) => a - b)
    for (const bin of byHeat) state = toggleBin(state, bin)
    expect(canSubmitGuess(state)).toBe(true)
    const result = await guess(state.sessionId, byHeat)
    state = applyGuess(state, result)
    if (state.state === 'won') {
      expect(bits(state.payoff ?? 0)).toBe('2985.3')
    } else {
      expect(state.payoff).toBe(0)
    }
    expect(state.revealedMissing).toHaveLength(2)
  })
})
