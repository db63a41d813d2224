import { ApiError, createGame, getGame, guess, play } from './api'
import {
  GameState,
  applyGuess,
  applyPlay,
  fromEnvelope,
  setIntensity,
  toggleBin,
} from './state'
import {
  Handlers,
  renderBinStrip,
  renderControls,
  renderError,
  renderLedger,
  renderSessionInfo,
} from './ui'
import './style.css'

let state: GameState | null = null
let lastFailed: (() => void) | null = null

const $ = (id: string) => document.getElementById(id) as HTMLElement

function render(): void {
  const setup = $('setup')
  const game = $('game')
  if (!state) {
    setup.hidden = false
    game.hidden = true
    return
  }
  setup.hidden = true
  game.hidden = false
  renderSessionInfo($('session-info'), state)
  renderLedger($('ledger'), state)
  renderBinStrip($('bin-strip'), state, handlers)
  renderControls($('controls'), state, handlers)
}

function showError(message: string | null, retry?: () => void): void {
  lastFailed = retry ?? null
  renderError($('error'), message, retry)
}

function syncHash(): void {
  if (state) window.location.hash = state.sessionId
}

async function doPlay(intensity: number): Promise<void> {
  if (!state) return
  const attempt = () => void doPlay(intensity)
  try {
    const result = await play(state.sessionId, intensity)
    state = applyPlay(state, result, intensity)
    showError(null)
    render()
  } catch (err) {
    showError((err as ApiError).message, attempt)
  }
}

async function doGuess(missing: number[]): Promise<void> {
  if (!state) return
  const attempt = () => void doGuess(missing)
  try {
    const result = await guess(state.sessionId, missing)
    state = applyGuess(state, result)
    showError(null)
    render()
  } catch (err) {
    showError((err as ApiError).message, attempt)
  }
}

const handlers: Handlers = {
  onPlay: (intensity) => void doPlay(intensity),
  onToggleBin: (bin) => {
    if (!state) return
    state = toggleBin(state, bin)
    render()
  },
  onIntensity: (intensity) => {
    if (!state) return
    state = setIntensity(state, intensity)
    render()
  },
  onGuess: (missing) => void doGuess(missing),
  onNewGame: () => {
    state = null
    window.location.hash = ''
    showError(null)
    render()
  },
}

function field(id: string): number {
  return Number((document.getElementById(id) as HTMLInputElement).value)
}

async function onCreate(event: Event): Promise<void> {
  event.preventDefault()
  const seedRaw = (document.getElementById('cfg-seed') as HTMLInputElement).value.trim()
  const request = {
    n: field('cfg-n'),
    m: field('cfg-m'),
    eta: field('cfg-eta'),
    dark: field('cfg-dark'),
    vis: field('cfg-vis'),
    ...(seedRaw === '' ? {} : { seed: Number(seedRaw) }),
  }
  const attempt = () => void onCreate(event)
  try {
    const env = await createGame(request)
    state = fromEnvelope(env)
    syncHash()
    showError(null)
    render()
  } catch (err) {
    showError((err as ApiError).message, attempt)
  }
}

async function restoreFromHash(): Promise<void> {
  const sessionId = window.location.hash.replace(/^#/, '')
  if (!sessionId) return
  try {
    const env = await getGame(sessionId)
    state = fromEnvelope(env)
    showError(null)
    render()
  } catch (err) {
    showError((err as ApiError).message, () => void restoreFromHash())
  }
}

export function boot(): void {
  $('create-form').addEventListener('submit', (event) => void onCreate(event))
  $('retry-anchor')?.addEventListener('click', () => lastFailed?.())
  render()
  void restoreFromHash()
}

if (typeof document !== 'undefined' && document.getElementById('create-form')) {
  boot()
}
