/** The 88 functional names of the reference descriptor set, in its order. */

const f0AndLoudnessFunctionals = [
  "amean", "stddevNorm", "percentile20.0", "percentile50.0", "percentile80.0",
  "pctlrange0-2", "meanRisingSlope", "stddevRisingSlope", "meanFallingSlope",
  "stddevFallingSlope",
];

function expand(base: string, functionals: string[]): string[] {
  return functionals.map((f) => `${base}_${f}`);
}

export const EGEMAPS_NAMES: readonly string[] = [
  ...expand("F0semitoneFrom27.5Hz_sma3nz", f0AndLoudnessFunctionals),
  ...expand("loudness_sma3", f0AndLoudnessFunctionals),
  ...expand("spectralFlux_sma3", ["amean", "stddevNorm"]),
  ...expand("mfcc1_sma3", ["amean", "stddevNorm"]),
  ...expand("mfcc2_sma3", ["amean", "stddevNorm"]),
  ...expand("mfcc3_sma3", ["amean", "stddevNorm"]),
  ...expand("mfcc4_sma3", ["amean", "stddevNorm"]),
  ...expand("jitterLocal_sma3nz", ["amean", "stddevNorm"]),
  ...expand("shimmerLocaldB_sma3nz", ["amean", "stddevNorm"]),
  ...expand("HNRdBACF_sma3nz", ["amean", "stddevNorm"]),
  ...expand("logRelF0-H1-H2_sma3nz", ["amean", "stddevNorm"]),
  ...expand("logRelF0-H1-A3_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F1frequency_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F1bandwidth_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F1amplitudeLogRelF0_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F2frequency_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F2bandwidth_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F2amplitudeLogRelF0_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F3frequency_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F3bandwidth_sma3nz", ["amean", "stddevNorm"]),
  ...expand("F3amplitudeLogRelF0_sma3nz", ["amean", "stddevNorm"]),
  ...expand("alphaRatioV_sma3nz", ["amean", "stddevNorm"]),
  ...expand("hammarbergIndexV_sma3nz", ["amean", "stddevNorm"]),
  ...expand("slopeV0-500_sma3nz", ["amean", "stddevNorm"]),
  ...expand("slopeV500-1500_sma3nz", ["amean", "stddevNorm"]),
  ...expand("spectralFluxV_sma3nz", ["amean", "stddevNorm"]),
  ...expand("mfcc1V_sma3nz", ["amean", "stddevNorm"]),
  ...expand("mfcc2V_sma3nz", ["amean", "stddevNorm"]),
  ...expand("mfcc3V_sma3nz", ["amean", "stddevNorm"]),
  ...expand("mfcc4V_sma3nz", ["amean", "stddevNorm"]),
  "alphaRatioUV_sma3nz_amean",
  "hammarbergIndexUV_sma3nz_amean",
  "slopeUV0-500_sma3nz_amean",
  "slopeUV500-1500_sma3nz_amean",
  "spectralFluxUV_sma3nz_amean",
  "loudnessPeaksPerSec",
  "VoicedSegmentsPerSec",
  "MeanVoicedSegmentLengthSec",
  "StddevVoicedSegmentLength",
  "MeanUnvoicedSegmentLength",
  "StddevUnvoicedSegmentLength",
  "equivalentSoundLevel_dBp",
];

if (EGEMAPS_NAMES.length !== 88) {
  throw new Error(`descriptor name table has ${EGEMAPS_NAMES.length} entries, expected 88`);
}
