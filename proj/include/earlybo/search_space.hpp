// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Six-dimensional LoRA fine-tuning hyperparameter space with a bijective
// (up to integer rounding) mapping to the unit hypercube used by the
// surrogate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "earlybo/detail/rng.hpp"
#include "earlybo/error.hpp"

namespace earlybo {

enum class DimensionKind { integer, real, log_real };

inline const char* to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::integer: return "integer";
    case DimensionKind::real: return "real";
    case DimensionKind::log_real: return "log-real";
  }
  return "?";
}

inline DimensionKind dimension_kind_from_string(const std::string& s) {
  if (s == "integer") return DimensionKind::integer;
  if (s == "real") return DimensionKind::real;
  if (s == "log-real") return DimensionKind::log_real;
  throw ValidationError("unknown dimension kind '" + s + "'");
}

/// One searchable hyperparameter with inclusive bounds.
struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::real;
  double low = 0.0;
  double high = 1.0;

  void validate() const {
    if (!(low < high)) {
      throw ValidationError("dimension '" + name + "': low must be < high");
    }
    if (kind == DimensionKind::log_real && low <= 0.0) {
      throw ValidationError("dimension '" + name + "': log-real requires low > 0");
    }
    if (kind == DimensionKind::integer &&
        (std::floor(low) != low || std::floor(high) != high)) {
      throw ValidationError("dimension '" + name + "': integer bounds must be integral");
    }
  }
};

/// One configuration of the six tuned hyperparameters.
struct ParamVector {
  int lora_target_index = 0;
  double learning_rate = 1e-4;
  int batch_size = 16;
  int lora_rank = 16;
  double lora_alpha = 32.0;
  double lora_dropout = 0.1;

  bool operator==(const ParamVector&) const = default;
};

/// Point in the unit hypercube, one coordinate per dimension in space order.
using UnitPoint = std::vector<double>;

namespace detail {

inline double param_field(const ParamVector& p, const std::string& name) {
  if (name == "lora_target_index") return static_cast<double>(p.lora_target_index);
  if (name == "learning_rate") return p.learning_rate;
  if (name == "batch_size") return static_cast<double>(p.batch_size);
  if (name == "lora_rank") return static_cast<double>(p.lora_rank);
  if (name == "lora_alpha") return p.lora_alpha;
  if (name == "lora_dropout") return p.lora_dropout;
  throw ValidationError("unknown hyperparameter '" + name + "'");
}

inline void set_param_field(ParamVector& p, const std::string& name, double value) {
  if (name == "lora_target_index") {
    p.lora_target_index = static_cast<int>(value);
  } else if (name == "learning_rate") {
    p.learning_rate = value;
  } else if (name == "batch_size") {
    p.batch_size = static_cast<int>(value);
  } else if (name == "lora_rank") {
    p.lora_rank = static_cast<int>(value);
  } else if (name == "lora_alpha") {
    p.lora_alpha = value;
  } else if (name == "lora_dropout") {
    p.lora_dropout = value;
  } else {
    throw ValidationError("unknown hyperparameter '" + name + "'");
  }
}

}  // namespace detail

/// Ordered collection of dimensions; the order defines the encoding order.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<Dimension> dimensions)
      : dimensions_(std::move(dimensions)) {
    for (const auto& dim : dimensions_) {
      dim.validate();
    }
    for (std::size_t i = 0; i < dimensions_.size(); ++i) {
      for (std::size_t j = i + 1; j < dimensions_.size(); ++j) {
        if (dimensions_[i].name == dimensions_[j].name) {
          throw ValidationError("duplicate dimension name '" + dimensions_[i].name + "'");
        }
      }
    }
  }

  [[nodiscard]] const std::vector<Dimension>& dimensions() const { return dimensions_; }
  [[nodiscard]] std::size_t size() const { return dimensions_.size(); }

  void validate(const ParamVector& params) const {
    for (const auto& dim : dimensions_) {
      const double v = detail::param_field(params, dim.name);
      if (v < dim.low || v > dim.high) {
        throw ValidationError("value " + std::to_string(v) + " for '" + dim.name +
                              "' outside [" + std::to_string(dim.low) + ", " +
                              std::to_string(dim.high) + "]");
      }
      if (dim.kind == DimensionKind::integer && std::floor(v) != v) {
        throw ValidationError("value for '" + dim.name + "' must be integral");
      }
    }
  }

 private:
  std::vector<Dimension> dimensions_;
};

/// The six tuned hyperparameters with their published bounds. Learning rate
/// and LoRA alpha span three decades and are encoded on log scale.
inline SearchSpace default_space() {
  return SearchSpace({
      {"lora_target_index", DimensionKind::integer, 0, 3},
      {"learning_rate", DimensionKind::log_real, 0.00001, 0.01},
      {"batch_size", DimensionKind::integer, 1, 32},
      {"lora_rank", DimensionKind::integer, 4, 64},
      {"lora_alpha", DimensionKind::log_real, 0.1, 128.0},
      {"lora_dropout", DimensionKind::real, 0.1, 0.8},
  });
}

/// Affine map of one value into [0, 1] (log-real dims map the logarithm).
inline double encode_coordinate(const Dimension& dim, double value) {
  if (dim.kind == DimensionKind::log_real) {
    return (std::log(value) - std::log(dim.low)) /
           (std::log(dim.high) - std::log(dim.low));
  }
  return (value - dim.low) / (dim.high - dim.low);
}

/// Inverse of encode_coordinate; integer dims round half away from zero and
/// clamp to the bounds.
inline double decode_coordinate(const Dimension& dim, double coord) {
  double value;
  if (dim.kind == DimensionKind::log_real) {
    value = std::exp(std::log(dim.low) +
                     coord * (std::log(dim.high) - std::log(dim.low)));
  } else {
    value = dim.low + coord * (dim.high - dim.low);
  }
  if (dim.kind == DimensionKind::integer) {
    value = std::round(value);
  }
  return std::clamp(value, dim.low, dim.high);
}

inline UnitPoint encode(const SearchSpace& space, const ParamVector& params) {
  space.validate(params);
  UnitPoint point;
  point.reserve(space.size());
  for (const auto& dim : space.dimensions()) {
    point.push_back(encode_coordinate(dim, detail::param_field(params, dim.name)));
  }
  return point;
}

inline ParamVector decode(const SearchSpace& space, const UnitPoint& point) {
  if (point.size() != space.size()) {
    throw ValidationError("unit point has arity " + std::to_string(point.size()) +
                          ", space has " + std::to_string(space.size()));
  }
  ParamVector params;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& dim = space.dimensions()[i];
    if (point[i] < 0.0 || point[i] > 1.0) {
      throw ValidationError("coordinate for '" + dim.name + "' outside [0, 1]");
    }
    detail::set_param_field(params, dim.name, decode_coordinate(dim, point[i]));
  }
  return params;
}

/// n configurations decoded from uniform unit-cube draws; a given seed
/// always yields the same list.
inline std::vector<ParamVector> sample_random(const SearchSpace& space,
                                              std::uint64_t rng_seed, std::size_t n) {
  if (n < 1) {
    throw ValidationError("sample_random requires n >= 1");
  }
  detail::UnitRng rng(rng_seed);
  std::vector<ParamVector> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    UnitPoint point(space.size());
    for (auto& coord : point) {
      coord = rng.next_unit();
    }
    samples.push_back(decode(space, point));
  }
  return samples;
}

/// Strictly nested projection-layer sets, one extra layer per index step.
/// The endpoints are the two classic choices; the layers added at indices
/// 1 and 3 are recorded in study metadata so results stay self-describing.
inline std::vector<std::string> lora_targets_for_index(int index) {
  static const std::array<std::vector<std::string>, 4> chains = {{
      {"q_proj", "v_proj"},
      {"q_proj", "k_proj", "v_proj"},
      {"q_proj", "k_proj", "v_proj", "o_proj"},
      {"q_proj", "k_proj", "v_proj", "o_proj", "gate_proj"},
  }};
  if (index < 0 || index > 3) {
    throw ValidationError("lora_target_index " + std::to_string(index) +
                          " outside [0, 3]");
  }
  return chains[static_cast<std::size_t>(index)];
}

}  // namespace earlybo
