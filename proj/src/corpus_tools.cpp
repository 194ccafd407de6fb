// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/corpus_tools.hpp"

#include <algorithm>
#include <cctype>
#include <cfenv>
#include <cmath>
#include <limits>
#include <numeric>
#include <regex>

#include "fclip/errors.hpp"
#include "fclip/rng.hpp"

namespace fclip {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

CaptionBlock split_caption(std::string_view raw_text) {
  const std::string text = trim(raw_text);
  if (text.empty()) throw CaptionParseError("empty caption text");

  static const std::regex header(R"(^(Figure|Fig\.?)\s*([0-9]+[-.]?[0-9]*))");
  static const std::regex marker(R"(\b([A-Z])\.\s)");

  std::smatch hm;
  if (!std::regex_search(text, hm, header)) {
    throw CaptionParseError("no figure header in caption: \"" + text.substr(0, 40) + "\"");
  }
  CaptionBlock block;
  block.figure_id = hm[2].str();
  while (!block.figure_id.empty() && (block.figure_id.back() == '.' || block.figure_id.back() == '-')) {
    block.figure_id.pop_back();
  }

  std::string body = text.substr(static_cast<std::size_t>(hm.length(0)));
  // Punctuation closing the header ("Figure 3:" or "Fig. 2 -").
  std::size_t skip = 0;
  while (skip < body.size() && (body[skip] == '.' || body[skip] == ':' || body[skip] == '-' ||
                                std::isspace(static_cast<unsigned char>(body[skip])))) {
    ++skip;
  }
  body = body.substr(skip);
  // Leading space lets a marker at the very start of the body match \b...\s.
  const std::string padded = " " + body;

  struct Cut {
    char letter;
    std::size_t begin;  // marker start
    std::size_t end;    // caption text start
  };
  std::vector<Cut> cuts;
  char last = 0;
  for (auto it = std::sregex_iterator(padded.begin(), padded.end(), marker); it != std::sregex_iterator(); ++it) {
    const char letter = (*it)[1].str()[0];
    if (letter <= last) continue;
    const auto pos = static_cast<std::size_t>(it->position(0));
    cuts.push_back({letter, pos, pos + static_cast<std::size_t>(it->length(0))});
    last = letter;
  }

  if (cuts.empty()) {
    const std::string caption = trim(body);
    if (caption.empty()) throw CaptionParseError("caption has a header but no text");
    block.subcaptions.push_back({'A', caption});
    return block;
  }

  block.preamble = trim(std::string_view(padded).substr(0, cuts.front().begin));
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const std::size_t stop = i + 1 < cuts.size() ? cuts[i + 1].begin : padded.size();
    std::string caption = trim(std::string_view(padded).substr(cuts[i].end, stop - cuts[i].end));
    if (!caption.empty()) block.subcaptions.push_back({cuts[i].letter, std::move(caption)});
  }
  if (block.subcaptions.empty()) throw CaptionParseError("sub-figure markers carry no text");
  return block;
}

double ColorHistogram::channel_mass(int channel) const {
  double s = 0.0;
  for (int b = 0; b < kHistogramBinsPerChannel; ++b) s += bins[static_cast<std::size_t>(channel * kHistogramBinsPerChannel + b)];
  return s;
}

double ColorHistogram::channel_mean(int channel) const {
  const double mass = channel_mass(channel);
  if (mass <= 0.0) return 0.0;
  constexpr double width = 256.0 / kHistogramBinsPerChannel;
  double s = 0.0;
  for (int b = 0; b < kHistogramBinsPerChannel; ++b) {
    s += bins[static_cast<std::size_t>(channel * kHistogramBinsPerChannel + b)] * (b + 0.5) * width;
  }
  return s / mass;
}

double ColorHistogram::red_dominance() const {
  return channel_mean(0) - 0.5 * (channel_mean(1) + channel_mean(2));
}

ColorHistogram color_histogram(const Image& image) {
  if (image.empty()) throw InvalidArgument("color_histogram: empty image");
  ColorHistogram h;
  constexpr int shift = 3;  // 256 / 32 values per bin
  for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
    for (int c = 0; c < 3; ++c) {
      h.bins[static_cast<std::size_t>(c * kHistogramBinsPerChannel + (image.pixels[i + static_cast<std::size_t>(c)] >> shift))] += 1.0;
    }
  }
  const double total = 3.0 * static_cast<double>(image.height) * image.width;
  for (auto& b : h.bins) b /= total;
  h.normalized = true;
  return h;
}

double histogram_distance(const ColorHistogram& a, const ColorHistogram& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    const double d = a.bins[i] - b.bins[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans(std::span<const std::vector<double>> points, int k, std::uint64_t seed, int max_iterations) {
  if (k <= 0) throw InvalidArgument("kmeans: k must be positive");
  if (points.size() < static_cast<std::size_t>(k)) throw InvalidArgument("kmeans: fewer points than clusters");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ShapeError("kmeans: ragged feature rows");
  }

  Rng rng(seed);
  KMeansResult result;
  result.centroids.push_back(points[rng.index(points.size())]);
  std::vector<double> d2(points.size());
  while (result.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : result.centroids) best = std::min(best, squared_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every point coincides with a centroid already.
      rng.uniform();
    }
    result.centroids.push_back(points[pick]);
  }

  result.assignment.assign(points.size(), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = nearest(points[i], result.centroids);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }
    result.iterations = iter + 1;
    if (!changed) break;
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(result.assignment[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) result.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return result;
}

std::vector<Modality> classify_modality(std::span<const ColorHistogram> histograms, const ModalityReferences& refs,
                                        std::uint64_t seed) {
  if (histograms.size() < 3) throw InvalidArgument("classify_modality needs at least 3 histograms");
  if (!refs.ffa.normalized || !refs.oct.normalized) {
    throw InvalidArgument("classify_modality: reference histograms must be normalized");
  }
  // Clustering runs on a canonical (lexicographic) ordering so the partition
  // does not depend on input order.
  std::vector<std::size_t> order(histograms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return histograms[a].bins < histograms[b].bins; });
  std::vector<std::vector<double>> points;
  points.reserve(histograms.size());
  for (std::size_t i : order) points.emplace_back(histograms[i].bins.begin(), histograms[i].bins.end());

  KMeansResult best_run;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kModalityRestarts; ++restart) {
    auto run = kmeans(points, 3, seed + static_cast<std::uint64_t>(restart), 100);
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += squared_distance(points[i], run.centroids[static_cast<std::size_t>(run.assignment[i])]);
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_run = std::move(run);
    }
  }
  KMeansResult km = best_run;
  for (std::size_t k = 0; k < order.size(); ++k) km.assignment[order[k]] = best_run.assignment[k];

  std::vector<std::size_t> counts(3, 0);
  for (int a : km.assignment) ++counts[static_cast<std::size_t>(a)];
  const auto populated = std::count_if(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; });

  int cfp_cluster = -1;
  if (populated >= 2) {
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < 3; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      ColorHistogram centroid;
      std::copy(km.centroids[static_cast<std::size_t>(c)].begin(), km.centroids[static_cast<std::size_t>(c)].end(),
                centroid.bins.begin());
      const double red = centroid.red_dominance();
      if (red > best) {
        best = red;
        cfp_cluster = c;
      }
    }
  }

  std::vector<Modality> labels(histograms.size());
  for (std::size_t i = 0; i < histograms.size(); ++i) {
    if (km.assignment[i] == cfp_cluster) {
      labels[i] = Modality::CFP;
      continue;
    }
    const double d_ffa = histogram_distance(histograms[i], refs.ffa);
    const double d_oct = histogram_distance(histograms[i], refs.oct);
    labels[i] = d_oct < d_ffa ? Modality::OCT : Modality::FFA;
  }
  return labels;
}

Image gamma_correct(const Image& image, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be a positive finite number");
  std::array<std::uint8_t, 256> lut{};
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (int x = 0; x < 256; ++x) {
    const double y = 255.0 * std::pow(x / 255.0, gamma);
    lut[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(std::clamp(std::nearbyint(y), 0.0, 255.0));
  }
  std::fesetround(saved);
  Image out = image;
  for (auto& p : out.pixels) p = lut[p];
  return out;
}

}  // namespace fclip
