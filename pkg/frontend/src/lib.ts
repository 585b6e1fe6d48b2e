// Small shared helpers with no DOM dependency.

/**
 * Guards async UI updates against out-of-order responses. Each call to
 * `begin()` takes a ticket; `isCurrent(ticket)` is true only for the most
 * recent one, so a slow earlier response can be discarded.
 */
export class LatestWins {
  private seq = 0;

  begin(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.seq;
  }
}

const ATC_LEVEL_LENGTHS = [1, 3, 4, 5, 7];

/** "N02BE01" -> ["N", "N02", "N02B", "N02BE", "N02BE01"]; shorter codes
 * yield only the levels they cover. */
export function atcBreadcrumb(code: string): string[] {
  return ATC_LEVEL_LENGTHS.filter((n) => n <= code.length).map((n) => code.slice(0, n));
}

export function tierBadgeClass(tier: string): string {
  switch (tier) {
    case "open":
      return "badge badge-open";
    case "restricted":
      return "badge badge-restricted";
    case "credentialed":
      return "badge badge-credentialed";
    default:
      return "badge";
  }
}

export function verdictBadgeClass(verdict: string): string {
  switch (verdict) {
    case "allow":
      return "badge badge-allow";
    case "summary-only":
      return "badge badge-summary";
    default:
      return "badge badge-deny";
  }
}

/**
 * Parses glossary editor text, one "source = target" pair per line.
 * Blank lines are skipped; malformed lines are reported, not guessed at.
 */
export function parseGlossary(text: string): {
  pairs: Array<[string, string]>;
  errors: string[];
} {
  const pairs: Array<[string, string]> = [];
  const errors: string[] = [];
  text.split("\n").forEach((raw, i) => {
    const line = raw.trim();
    if (!line) return;
    const eq = line.indexOf("=");
    const src = eq < 0 ? "" : line.slice(0, eq).trim();
    const dst = eq < 0 ? "" : line.slice(eq + 1).trim();
    if (!src || !dst) {
      errors.push(`line ${i + 1}: expected "source = target", got "${line}"`);
    } else {
      pairs.push([src, dst]);
    }
  });
  return { pairs, errors };
}

export function formatScore(score: number | undefined): string {
  return score === undefined ? "" : score.toFixed(4);
}

export function formatCount(count: number, unit: string): string {
  return `${count.toLocaleString("en-US")} ${unit}`;
}
