/** Binary-classification metrics with the standard closed-form definitions. */

export interface Confusion {
  tp: number;
  fp: number;
  fn: number;
  tn: number;
}

export function confusion(scores: number[], labels: number[], threshold = 0.5): Confusion {
  const c = { tp: 0, fp: 0, fn: 0, tn: 0 };
  scores.forEach((s, i) => {
    const predicted = s >= threshold;
    if (labels[i] === 1) {
      predicted ? c.tp++ : c.fn++;
    } else {
      predicted ? c.fp++ : c.tn++;
    }
  });
  return c;
}

export function accuracy(c: Confusion): number {
  const total = c.tp + c.fp + c.fn + c.tn;
  return total === 0 ? 0 : (c.tp + c.tn) / total;
}

export function precision(c: Confusion): number {
  return c.tp + c.fp === 0 ? 0 : c.tp / (c.tp + c.fp);
}

export function recall(c: Confusion): number {
  return c.tp + c.fn === 0 ? 0 : c.tp / (c.tp + c.fn);
}

export function f1(c: Confusion): number {
  const p = precision(c);
  const r = recall(c);
  return p + r === 0 ? 0 : (2 * p * r) / (p + r);
}

export interface RocPoint {
  threshold: number;
  fpr: number;
  tpr: number;
}

/**
 * ROC curve over the distinct score thresholds, from (0,0) to (1,1).
 * Ties share a threshold so the curve is well defined for repeated scores.
 */
export function rocCurve(scores: number[], labels: number[]): RocPoint[] {
  const nPos = labels.filter((l) => l === 1).length;
  const nNeg = labels.length - nPos;
  const order = scores
    .map((s, i) => ({ s, y: labels[i] }))
    .sort((a, b) => b.s - a.s);
  const points: RocPoint[] = [{ threshold: Infinity, fpr: 0, tpr: 0 }];
  let tp = 0;
  let fp = 0;
  for (let i = 0; i < order.length; i++) {
    if (order[i].y === 1) tp++;
    else fp++;
    const last = i + 1 === order.length || order[i + 1].s !== order[i].s;
    if (last) {
      points.push({
        threshold: order[i].s,
        fpr: nNeg === 0 ? NaN : fp / nNeg,
        tpr: nPos === 0 ? NaN : tp / nPos,
      });
    }
  }
  return points;
}

/** Area under the ROC curve by trapezoid; NaN when the labels hold one class. */
export function rocAuc(scores: number[], labels: number[]): number {
  const nPos = labels.filter((l) => l === 1).length;
  if (nPos === 0 || nPos === labels.length) return NaN;
  const points = rocCurve(scores, labels);
  let auc = 0;
  for (let i = 1; i < points.length; i++) {
    auc += ((points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr)) / 2;
  }
  return auc;
}

export interface Evaluation {
  n: number;
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  auc: number | null; // null marks an undefined AUC (single-class set)
}

export function evaluateScores(scores: number[], labels: number[]): Evaluation {
  const c = confusion(scores, labels);
  const auc = rocAuc(scores, labels);
  return {
    n: labels.length,
    accuracy: accuracy(c),
    precision: precision(c),
    recall: recall(c),
    f1: f1(c),
    auc: Number.isNaN(auc) ? null : auc,
  };
}
