/**
 * CIELAB to sRGB for display. The matrices and thresholds mirror the
 * backend's conversion exactly so dumped Lab triples render as the
 * colors the measures were computed on.
 */

// sRGB (linear) -> XYZ, D65. Rows sum exactly to the white point.
const RGB_TO_XYZ = [
  [0.4124564, 0.3575761, 0.1804375],
  [0.2126729, 0.7151522, 0.072175],
  [0.0193339, 0.119192, 0.9503041],
];

const WHITE = RGB_TO_XYZ.map((row) => row[0] + row[1] + row[2]);

const EPS = 216 / 24389;
const KAPPA = 24389 / 27;

function invert3(m: number[][]): number[][] {
  const [a, b, c] = m[0];
  const [d, e, f] = m[1];
  const [g, h, i] = m[2];
  const det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  return [
    [(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det],
    [(f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det],
    [(d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det],
  ];
}

const XYZ_TO_RGB = invert3(RGB_TO_XYZ);

export function labToSrgb(lab: [number, number, number]): [number, number, number] {
  const [L, a, b] = lab;
  const fy = (L + 16) / 116;
  const fx = fy + a / 500;
  const fz = fy - b / 200;
  const finv = (f: number) => {
    const f3 = f ** 3;
    return f3 > EPS ? f3 : (116 * f - 16) / KAPPA;
  };
  const xyz = [finv(fx) * WHITE[0], finv(fy) * WHITE[1], finv(fz) * WHITE[2]];
  const out: number[] = [];
  for (const row of XYZ_TO_RGB) {
    let linear = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
    linear = Math.min(1, Math.max(0, linear));
    out.push(linear > 0.0031308 ? 1.055 * linear ** (1 / 2.4) - 0.055 : 12.92 * linear);
  }
  return [
    Math.min(1, Math.max(0, out[0])),
    Math.min(1, Math.max(0, out[1])),
    Math.min(1, Math.max(0, out[2])),
  ];
}

export function srgbToLab(rgb: [number, number, number]): [number, number, number] {
  const linear = rgb.map((v) => (v > 0.04045 ? ((v + 0.055) / 1.055) ** 2.4 : v / 12.92));
  const xyz = RGB_TO_XYZ.map(
    (row) => row[0] * linear[0] + row[1] * linear[1] + row[2] * linear[2],
  );
  const f = xyz.map((v, i) => {
    const t = v / WHITE[i];
    return t > EPS ? Math.cbrt(t) : (KAPPA * t + 16) / 116;
  });
  return [116 * f[1] - 16, 500 * (f[0] - f[1]), 200 * (f[1] - f[2])];
}

export function labToHex(lab: [number, number, number]): string {
  const rgb = labToSrgb(lab);
  return (
    "#" +
    rgb
      .map((v) =>
        Math.round(v * 255)
          .toString(16)
          .padStart(2, "0"),
      )
      .join("")
  );
}
