// DOM rendering. Every state change re-renders the affected panels from
// scratch; the state object is the single source of truth.

import { bits, signedBits } from './format'
import {
  GameState,
  INTENSITY_PRESETS,
  canSubmitGuess,
  nextPlayPrice,
  projectedNet,
} from './state'

export interface Handlers {
  onPlay(intensity: number): void
  onToggleBin(bin: number): void
  onIntensity(intensity: number): void
  onGuess(missing: number[]): void
  onNewGame(): void
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

export function renderLedger(root: HTMLElement, state: GameState): void {
  root.replaceChildren()
  const rows: [string, string][] = [
    ['Spent', `${bits(state.spent)} bits`],
    ['Classical limit', `${bits(state.classical)} bits`],
    ['Projected net if correct', `${signedBits(projectedNet(state))} bits`],
    ['Plays', String(state.plays.length)],
  ]
  if (state.state !== 'open') {
    rows.push(['Outcome', state.state === 'won' ? 'WON' : 'LOST'])
    rows.push(['Payoff', `${bits(state.payoff ?? 0)} bits`])
    rows.push(['Net', `${signedBits(state.net ?? -state.spent)} bits`])
  }
  for (const [label, value] of rows) {
    const row = el('div', 'ledger-row')
    row.append(el('span', 'ledger-label', label), el('span', 'ledger-value', value))
    root.append(row)
  }
}

export function renderBinStrip(root: HTMLElement, state: GameState, handlers: Handlers): void {
  root.replaceChildren()
  const maxCount = Math.max(1, ...state.heatmap)
  const revealed = new Set(state.revealedMissing ?? [])
  for (let bin = 1; bin <= state.n; bin += 1) {
    const count = state.heatmap[bin - 1]
    const cell = el('button', 'bin')
    cell.type = 'button'
    cell.title = `bin ${bin}: ${count} click${count === 1 ? '' : 's'}`
    cell.style.setProperty('--heat', String(count / maxCount))
    if (count > 0) cell.classList.add('clicked')
    if (state.selectedBins.has(bin)) cell.classList.add('selected')
    if (revealed.has(bin)) cell.classList.add('revealed')
    cell.append(el('span', 'bin-index', String(bin)), el('span', 'bin-count', String(count)))
    cell.disabled = state.state !== 'open'
    cell.addEventListener('click', () => handlers.onToggleBin(bin))
    root.append(cell)
  }
}

export function renderControls(root: HTMLElement, state: GameState, handlers: Handlers): void {
  root.replaceChildren()
  const open = state.state === 'open'

  const wager = el('div', 'wager')
  wager.append(el('span', 'wager-label', 'Intensity per play'))
  for (const preset of INTENSITY_PRESETS) {
    const button = el('button', 'preset', preset.toFixed(1))
    button.type = 'button'
    if (state.selectedIntensity === preset) button.classList.add('active')
    button.disabled = !open
    button.addEventListener('click', () => handlers.onIntensity(preset))
    wager.append(button)
  }
  const free = el('input', 'free-intensity') as HTMLInputElement
  free.type = 'number'
  free.min = '0'
  free.step = '0.1'
  free.value = String(state.selectedIntensity)
  free.disabled = !open
  free.addEventListener('change', () => {
    const value = Number(free.value)
    if (value >= 0) handlers.onIntensity(value)
  })
  wager.append(free)
  root.append(wager)

  const playButton = el(
    'button',
    'play-button',
    `Play (${bits(nextPlayPrice(state))} bits)`,
  )
  playButton.type = 'button'
  playButton.disabled = !open
  playButton.addEventListener('click', () => handlers.onPlay(state.selectedIntensity))
  root.append(playButton)

  const guessButton = el(
    'button',
    'guess-button',
    `Guess ${state.selectedBins.size}/${state.m} selected`,
  )
  guessButton.type = 'button'
  guessButton.disabled = !canSubmitGuess(state)
  guessButton.addEventListener('click', () =>
    handlers.onGuess([...state.selectedBins].sort((a, b) => a - b)),
  )
  root.append(guessButton)

  if (!open) {
    const again = el('button', 'new-game', 'New game')
    again.type = 'button'
    again.addEventListener('click', () => handlers.onNewGame())
    root.append(again)
  }
}

export function renderError(root: HTMLElement, message: string | null, retry?: () => void): void {
  root.replaceChildren()
  if (!message) return
  root.append(el('span', 'error-message', message))
  if (retry) {
    const button = el('button', 'retry', 'Retry')
    button.type = 'button'
    button.addEventListener('click', retry)
    root.append(button)
  }
}

export function renderSessionInfo(root: HTMLElement, state: GameState): void {
  root.replaceChildren()
  root.append(
    el('span', 'session-chip', `session ${state.sessionId}`),
    el('span', 'session-chip', `seed ${state.seed}`),
    el('span', 'session-chip', `n=${state.n} m=${state.m}`),
  )
}
