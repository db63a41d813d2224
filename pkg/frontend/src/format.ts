// Ledger numbers display in bits at one decimal, matching the payout
// table's precision.

export function bits(value: number): string {
  return value.toFixed(1)
}

export function signedBits(value: number): string {
  const text = bits(Math.abs(value))
  return value < 0 ? `-${text}` : `+${text}`
}

export function percent(value: number): string {
  return `${(100 * value).toFixed(1)}%`
}
