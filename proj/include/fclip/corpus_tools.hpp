// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fclip/data_model.hpp"
#include "fclip/image.hpp"

namespace fclip {

struct SubCaption {
  char letter = 'A';
  std::string caption;

  friend bool operator==(const SubCaption&, const SubCaption&) = default;
};

// A figure caption split at its "A. ", "B. ", ... markers. `preamble` holds any
// text between the figure header and the first marker; it describes every
// sub-figure and is kept out of the individual sub-captions.
struct CaptionBlock {
  std::string figure_id;
  std::string preamble;
  std::vector<SubCaption> subcaptions;
};

// Header: ^(Figure|Fig\.?)\s*([0-9]+[-.]?[0-9]*); markers: \b([A-Z])\.\s.
// A marker is accepted only if its letter is greater than the previous
// accepted one. Without markers the body becomes a single sub-caption 'A'.
// Throws CaptionParseError when there is no header.
CaptionBlock split_caption(std::string_view raw_text);

inline constexpr int kHistogramBinsPerChannel = 32;
inline constexpr int kHistogramSize = 3 * kHistogramBinsPerChannel;

// 32 bins per channel (R, G, B order), L1-normalized over all 96 bins.
struct ColorHistogram {
  std::array<double, kHistogramSize> bins{};
  bool normalized = false;

  double channel_mass(int channel) const;
  // Intensity-weighted mean of one channel in [0, 255], from bin centres.
  double channel_mean(int channel) const;
  // Red mean minus the mean of green and blue; high for colour fundus photos,
  // near zero for grey-scale angiograms and OCT scans.
  double red_dominance() const;
};

ColorHistogram color_histogram(const Image& image);

double histogram_distance(const ColorHistogram& a, const ColorHistogram& b);

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding over dense feature rows. Empty
// clusters keep their seeded centroid; assignment ties go to the lowest index.
KMeansResult kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed,
                    int max_iterations = 100);

struct ModalityReferences {
  ColorHistogram ffa;
  ColorHistogram oct;
};

inline constexpr int kModalityRestarts = 10;

// Three-way k-means over histograms, best of kModalityRestarts seedings by
// inertia; the non-empty cluster with the highest red dominance is CFP (only when at least two clusters are populated), every
// other item is FFA or OCT by nearer reference, FFA on exact ties.
std::vector<Modality> classify_modality(std::span<const ColorHistogram> histograms,
                                        const ModalityReferences& refs, std::uint64_t seed = 0);

inline constexpr double kDarkToneGamma = 0.8;

// Maps each channel value x to 255 * (x / 255)^gamma rounded half-to-even.
Image gamma_correct(const Image& image, double gamma);

}  // namespace fclip
