// Copyright 2026 The DPAD Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpad/geometry.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dpad/error.h"

namespace dpad {
namespace {

std::string BoxString(const BBox& b) {
  std::ostringstream os;
  os << "[" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << "]";
  return os.str();
}

void ValidateThreshold(double tau, const char* name) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::kInvalidThreshold,
                std::string(name) + " must be positive and finite, got " + std::to_string(tau));
  }
}

void CheckSameFrame(uint32_t ha, uint32_t wa, uint32_t hb, uint32_t wb) {
  if (ha != hb || wa != wb) {
    throw Error(ErrorCode::kShapeMismatch, std::to_string(ha) + "x" + std::to_string(wa) +
                                               " vs " + std::to_string(hb) + "x" +
                                               std::to_string(wb));
  }
}

}  // namespace

bool BBox::IsValid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x2 > x1 && y2 > y1;
}

bool KeyPoint::IsValid() const { return std::isfinite(x) && std::isfinite(y); }

Localization Localization::Translated(double dx, double dy) const {
  return {bbox.Translated(dx, dy), {p1.x + dx, p1.y + dy}, {p2.x + dx, p2.y + dy}};
}

void ValidateBox(const BBox& box) {
  if (!box.IsValid()) throw Error(ErrorCode::kInvalidBox, BoxString(box));
}

double BoxIou(const BBox& a, const BBox& b) {
  ValidateBox(a);
  ValidateBox(b);
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.Area() + b.Area() - inter);
}

double IouReward(const BBox& pred, const BBox& gt) { return BoxIou(pred, gt) > 0.5 ? 1.0 : 0.0; }

double MeanAbsBoxError(const BBox& pred, const BBox& gt) {
  ValidateBox(pred);
  ValidateBox(gt);
  return (std::abs(pred.x1 - gt.x1) + std::abs(pred.y1 - gt.y1) + std::abs(pred.x2 - gt.x2) +
          std::abs(pred.y2 - gt.y2)) /
         4.0;
}

double MeanAbsPointError(const std::pair<KeyPoint, KeyPoint>& pred,
                         const std::pair<KeyPoint, KeyPoint>& gt) {
  return (std::abs(pred.first.x - gt.first.x) + std::abs(pred.first.y - gt.first.y) +
          std::abs(pred.second.x - gt.second.x) + std::abs(pred.second.y - gt.second.y)) /
         4.0;
}

double L1BoxReward(const BBox& pred, const BBox& gt, double tau_box) {
  ValidateThreshold(tau_box, "tau_box");
  return MeanAbsBoxError(pred, gt) < tau_box ? 1.0 : 0.0;
}

double L1PointsReward(const std::pair<KeyPoint, KeyPoint>& pred,
                      const std::pair<KeyPoint, KeyPoint>& gt, double tau_pt) {
  ValidateThreshold(tau_pt, "tau_pt");
  // NaN compares false, so non-finite points never earn the reward.
  return MeanAbsPointError(pred, gt) < tau_pt ? 1.0 : 0.0;
}

GeoBreakdown GeoReward(const Localization& pred, const Localization& gt,
                       const GeoThresholds& thresholds) {
  GeoBreakdown g;
  g.iou = BoxIou(pred.bbox, gt.bbox);
  g.iou_reward = g.iou > 0.5 ? 1.0 : 0.0;
  g.l1_box = MeanAbsBoxError(pred.bbox, gt.bbox);
  g.l1_box_reward = L1BoxReward(pred.bbox, gt.bbox, thresholds.tau_box);
  g.l1_points = MeanAbsPointError({pred.p1, pred.p2}, {gt.p1, gt.p2});
  g.l1_points_reward = L1PointsReward({pred.p1, pred.p2}, {gt.p1, gt.p2}, thresholds.tau_pt);
  g.score = g.iou_reward + g.l1_box_reward + g.l1_points_reward;
  return g;
}

void ValidateRle(const MaskRLE& rle) {
  if (rle.height == 0 || rle.width == 0) {
    throw Error(ErrorCode::kMalformedRle, "mask dimensions must be positive");
  }
  uint64_t sum = 0;
  for (size_t i = 0; i < rle.counts.size(); ++i) {
    if (i > 0 && rle.counts[i] == 0 && rle.counts[i - 1] == 0) {
      throw Error(ErrorCode::kMalformedRle,
                  "consecutive zero-length runs at index " + std::to_string(i));
    }
    sum += rle.counts[i];
  }
  const uint64_t expected = uint64_t{rle.height} * rle.width;
  if (sum != expected) {
    throw Error(ErrorCode::kMalformedRle, "run lengths sum to " + std::to_string(sum) +
                                              ", expected " + std::to_string(expected));
  }
}

MaskRLE RleEncode(const Bitmap& bitmap) {
  if (bitmap.height == 0 || bitmap.width == 0 ||
      bitmap.data.size() != size_t{bitmap.height} * bitmap.width) {
    throw Error(ErrorCode::kMalformedRle, "bitmap dimensions must be positive and match data");
  }
  MaskRLE rle{bitmap.height, bitmap.width, {}};
  bool value = false;
  uint32_t run = 0;
  for (uint8_t px : bitmap.data) {
    const bool v = px != 0;
    if (v != value) {
      rle.counts.push_back(run);
      run = 0;
      value = v;
    }
    ++run;
  }
  rle.counts.push_back(run);
  return rle;
}

Bitmap RleDecode(const MaskRLE& rle) {
  ValidateRle(rle);
  Bitmap bitmap(rle.height, rle.width);
  size_t pos = 0;
  uint8_t value = 0;
  for (uint32_t run : rle.counts) {
    std::fill_n(bitmap.data.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
    pos += run;
    value = value ? 0 : 1;
  }
  return bitmap;
}

uint64_t RleArea(const MaskRLE& rle) {
  ValidateRle(rle);
  uint64_t area = 0;
  for (size_t i = 1; i < rle.counts.size(); i += 2) area += rle.counts[i];
  return area;
}

simd::OverlapCounts RleOverlap(const MaskRLE& a, const MaskRLE& b) {
  ValidateRle(a);
  ValidateRle(b);
  CheckSameFrame(a.height, a.width, b.height, b.width);

  simd::OverlapCounts c;
  size_t ia = 0, ib = 0;
  uint64_t left_a = a.counts.empty() ? 0 : a.counts[0];
  uint64_t left_b = b.counts.empty() ? 0 : b.counts[0];
  bool va = false, vb = false;
  uint64_t remaining = uint64_t{a.height} * a.width;
  while (remaining > 0) {
    // Skip exhausted runs; each skip flips the run value.
    while (left_a == 0) {
      left_a = a.counts[++ia];
      va = !va;
    }
    while (left_b == 0) {
      left_b = b.counts[++ib];
      vb = !vb;
    }
    const uint64_t step = std::min(left_a, left_b);
    if (va && vb) c.intersection += step;
    if (va || vb) c.union_ += step;
    left_a -= step;
    left_b -= step;
    remaining -= step;
  }
  return c;
}

double IouFromCounts(const simd::OverlapCounts& counts) {
  if (counts.union_ == 0) return 1.0;
  return static_cast<double>(counts.intersection) / static_cast<double>(counts.union_);
}

double MaskIou(const MaskRLE& a, const MaskRLE& b) { return IouFromCounts(RleOverlap(a, b)); }

Bitmap RasterizeBox(const BBox& box, uint32_t height, uint32_t width) {
  ValidateBox(box);
  Bitmap bitmap(height, width);
  for (uint32_t col = 0; col < width; ++col) {
    const double cx = col + 0.5;
    if (cx < box.x1 || cx >= box.x2) continue;
    for (uint32_t row = 0; row < height; ++row) {
      const double cy = row + 0.5;
      if (cy >= box.y1 && cy < box.y2) bitmap.set(row, col, 1);
    }
  }
  return bitmap;
}

simd::OverlapCounts BitmapOverlap(const Bitmap& a, const Bitmap& b) {
  CheckSameFrame(a.height, a.width, b.height, b.width);
  return simd::Overlap(a.data, b.data);
}

}  // namespace dpad
