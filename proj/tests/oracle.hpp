#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <vector>

#include "robench/detection_eval.hpp"

namespace oracle {

using robench::BoundingBox;
using robench::Detection;

inline double naive_iou(const BoundingBox& a, const BoundingBox& b) {
  const double x0 = std::max(a.x, b.x), x1 = std::min(a.x + a.w, b.x + b.w);
  const double y0 = std::max(a.y, b.y), y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double i = (x1 - x0) * (y1 - y0);
  return i / (a.w * a.h + b.w * b.h - i);
}

// Direct trace of the rule: repeatedly take the best remaining detection
// (first in input order among equal scores) and give it the free ground truth
// of highest overlap above 0.5 (first among equal overlaps).
inline std::vector<int> naive_match(const std::vector<Detection>& dts, const std::vector<BoundingBox>& gts) {
  std::vector<int> out(dts.size(), -1);
  std::vector<bool> done(dts.size(), false), used(gts.size(), false);
  for (std::size_t step = 0; step < dts.size(); ++step) {
    std::size_t pick = dts.size();
    for (std::size_t i = 0; i < dts.size(); ++i)
      if (!done[i] && (pick == dts.size() || dts[i].score > dts[pick].score)) pick = i;
    done[pick] = true;
    double best = 0.5;
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (!used[g] && naive_iou(dts[pick].box, gts[g]) > best) {
        best = naive_iou(dts[pick].box, gts[g]);
        out[pick] = static_cast<int>(g);
      }
    if (out[pick] >= 0) used[static_cast<std::size_t>(out[pick])] = true;
  }
  return out;
}

}  // namespace oracle
