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

// Boxes, key points, run-length masks, and the geometric location reward.
//
// Boxes use corner form [x1, y1, x2, y2] in pixel coordinates with the origin
// at the top-left. Masks use the column-major run-length layout common to
// detection datasets: the first run counts background pixels (and may be 0).

#ifndef DPAD_GEOMETRY_H_
#define DPAD_GEOMETRY_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "dpad/simd/kernels.h"

namespace dpad {

struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool IsValid() const;
  double Width() const { return x2 - x1; }
  double Height() const { return y2 - y1; }
  double Area() const { return Width() * Height(); }
  BBox Translated(double dx, double dy) const { return {x1 + dx, y1 + dy, x2 + dx, y2 + dy}; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct KeyPoint {
  double x = 0.0;
  double y = 0.0;

  bool IsValid() const;
  friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

struct Localization {
  BBox bbox;
  KeyPoint p1;
  KeyPoint p2;

  Localization Translated(double dx, double dy) const;
  friend bool operator==(const Localization&, const Localization&) = default;
};

// Throws Error(kInvalidBox) unless x2 > x1, y2 > y1 and all coordinates are
// finite.
void ValidateBox(const BBox& box);

double BoxIou(const BBox& a, const BBox& b);

// 1.0 iff IoU is strictly greater than 0.5.
double IouReward(const BBox& pred, const BBox& gt);

double MeanAbsBoxError(const BBox& pred, const BBox& gt);
double MeanAbsPointError(const std::pair<KeyPoint, KeyPoint>& pred,
                         const std::pair<KeyPoint, KeyPoint>& gt);

// 1.0 iff the mean absolute coordinate error is strictly below tau. tau must
// be positive and finite (kInvalidThreshold otherwise).
double L1BoxReward(const BBox& pred, const BBox& gt, double tau_box);
double L1PointsReward(const std::pair<KeyPoint, KeyPoint>& pred,
                      const std::pair<KeyPoint, KeyPoint>& gt, double tau_pt);

struct GeoThresholds {
  double tau_box = 10.0;
  double tau_pt = 10.0;
};

struct GeoBreakdown {
  double iou = 0.0;
  double iou_reward = 0.0;
  double l1_box = 0.0;
  double l1_box_reward = 0.0;
  double l1_points = 0.0;
  double l1_points_reward = 0.0;
  double score = 0.0;  // sum of the three binary sub-rewards, in [0, 3]
};

GeoBreakdown GeoReward(const Localization& pred, const Localization& gt,
                       const GeoThresholds& thresholds = {});

// Binary mask stored column-major: pixel (row, col) lives at
// data[col * height + row]. Nonzero bytes are foreground.
struct Bitmap {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<uint8_t> data;

  Bitmap() = default;
  Bitmap(uint32_t h, uint32_t w) : height(h), width(w), data(size_t{h} * w, 0) {}

  uint8_t at(uint32_t row, uint32_t col) const { return data[size_t{col} * height + row]; }
  void set(uint32_t row, uint32_t col, uint8_t v) { data[size_t{col} * height + row] = v; }

  friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

struct MaskRLE {
  uint32_t height = 0;
  uint32_t width = 0;
  std::vector<uint32_t> counts;

  friend bool operator==(const MaskRLE&, const MaskRLE&) = default;
};

// Throws Error(kMalformedRle) on zero dimensions, a run sum different from
// height * width, or two consecutive zero-length runs.
void ValidateRle(const MaskRLE& rle);

MaskRLE RleEncode(const Bitmap& bitmap);
Bitmap RleDecode(const MaskRLE& rle);
uint64_t RleArea(const MaskRLE& rle);

// Intersection and union pixel counts, computed by merging the two run lists.
// Throws kShapeMismatch when the frames differ.
simd::OverlapCounts RleOverlap(const MaskRLE& a, const MaskRLE& b);

// Empty-vs-empty is 1.0; otherwise intersection / union.
double IouFromCounts(const simd::OverlapCounts& counts);

double MaskIou(const MaskRLE& a, const MaskRLE& b);

// A pixel is inside when its center lies in [x1, x2) x [y1, y2).
Bitmap RasterizeBox(const BBox& box, uint32_t height, uint32_t width);

simd::OverlapCounts BitmapOverlap(const Bitmap& a, const Bitmap& b);

}  // namespace dpad

#endif  // DPAD_GEOMETRY_H_
