// Copyright (c) 2026, the earlybo authors
// SPDX-License-Identifier: Apache-2.0
//
// Attribute-extraction accuracy: per attribute, the fraction of non-empty
// ground-truth values whose prediction matches after normalization.
// Records with empty truth are excluded outright, so hallucinated values
// on absent attributes do not count against a model. The overall objective
// is the equal-weight mean over the attributes.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlybo/detail/unicode.hpp"
#include "earlybo/error.hpp"

namespace earlybo {

enum class PageClass { product, contact };

inline const char* to_string(PageClass page_class) {
  return page_class == PageClass::product ? "product" : "contact";
}

inline PageClass page_class_from_string(const std::string& s) {
  if (s == "product") return PageClass::product;
  if (s == "contact") return PageClass::contact;
  throw DataError("unknown page class '" + s + "'");
}

/// The eight evaluated attributes, in the canonical table column order.
enum class Attribute { price, description, rating, title, email, facebook, phone, twitter };

inline constexpr std::array<Attribute, 8> kAllAttributes = {
    Attribute::price, Attribute::description, Attribute::rating, Attribute::title,
    Attribute::email, Attribute::facebook,    Attribute::phone,  Attribute::twitter};

inline const char* to_string(Attribute attribute) {
  switch (attribute) {
    case Attribute::price: return "price";
    case Attribute::description: return "description";
    case Attribute::rating: return "rating";
    case Attribute::title: return "title";
    case Attribute::email: return "email";
    case Attribute::facebook: return "facebook";
    case Attribute::phone: return "phone";
    case Attribute::twitter: return "twitter";
  }
  return "?";
}

/// Display names matching the published table layout.
inline const char* display_name(Attribute attribute) {
  switch (attribute) {
    case Attribute::price: return "Price";
    case Attribute::description: return "Product Description";
    case Attribute::rating: return "Product Rating";
    case Attribute::title: return "Product Title";
    case Attribute::email: return "Contact Email";
    case Attribute::facebook: return "Contact Facebook";
    case Attribute::phone: return "Contact Phone";
    case Attribute::twitter: return "Contact Twitter";
  }
  return "?";
}

inline Attribute attribute_from_string(const std::string& s) {
  for (Attribute a : kAllAttributes) {
    if (s == to_string(a)) return a;
  }
  throw DataError("unknown attribute '" + s + "'");
}

inline PageClass page_class_of(Attribute attribute) {
  switch (attribute) {
    case Attribute::price:
    case Attribute::description:
    case Attribute::rating:
    case Attribute::title:
      return PageClass::product;
    default:
      return PageClass::contact;
  }
}

struct AttributeRecord {
  std::string page_id;
  PageClass page_class = PageClass::product;
  Attribute attribute = Attribute::price;
  std::string truth_value;
  std::string predicted_value;

  void validate() const {
    if (page_class_of(attribute) != page_class) {
      throw DataError("attribute '" + std::string(to_string(attribute)) +
                      "' is not a " + to_string(page_class) + "-page attribute");
    }
  }
};

/// Canonical form used for matching: canonical composition, surrounding
/// whitespace trimmed, internal whitespace runs collapsed to one space,
/// case folded. Empty after trimming means "no value".
inline std::string normalize_value(std::string_view raw) {
  auto codepoints = detail::compose_canonical(detail::utf8_decode(raw));
  std::vector<char32_t> folded;
  folded.reserve(codepoints.size());
  bool pending_space = false;
  bool seen_content = false;
  for (char32_t cp : codepoints) {
    if (detail::is_unicode_whitespace(cp)) {
      pending_space = seen_content;  // leading whitespace drops
      continue;
    }
    if (pending_space) {
      folded.push_back(U' ');
      pending_space = false;
    }
    detail::casefold_append(folded, cp);
    seen_content = true;
  }
  return detail::utf8_encode(folded);
}

struct MatchOptions {
  /// Off by default: when set, price/rating values also match if both parse
  /// as numbers equal to within 1e-9 after currency symbols are stripped.
  bool numeric_equivalence = false;
};

namespace detail {

inline std::optional<double> parse_number_stripped(const std::string& normalized) {
  std::string cleaned;
  cleaned.reserve(normalized.size());
  for (char32_t cp : utf8_decode(normalized)) {
    switch (cp) {
      case U'$': case U'£': case U'¥': case U'€': case U'₹':
      case U',': case U' ':
        continue;
      default:
        utf8_append(cleaned, cp);
    }
  }
  if (cleaned.empty()) return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(cleaned.c_str(), &end);
  if (end == nullptr || *end != '\0' || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline bool is_numeric_attribute(Attribute attribute) {
  return attribute == Attribute::price || attribute == Attribute::rating;
}

}  // namespace detail

inline bool values_match(Attribute attribute, const std::string& truth,
                         const std::string& prediction, const MatchOptions& options = {}) {
  const std::string t = normalize_value(truth);
  const std::string p = normalize_value(prediction);
  if (t == p) return true;
  if (options.numeric_equivalence && detail::is_numeric_attribute(attribute)) {
    const auto tv = detail::parse_number_stripped(t);
    const auto pv = detail::parse_number_stripped(p);
    if (tv && pv) return std::abs(*tv - *pv) <= 1e-9;
  }
  return false;
}

struct AttributeAccuracy {
  /// Unset when the attribute has no non-empty ground truth (0/0 is
  /// surfaced, never coerced to a number).
  std::optional<double> accuracy;
  long n_nonempty_truth = 0;
};

/// Accuracy over records of a single attribute: matches among non-empty
/// truths divided by the count of non-empty truths.
inline AttributeAccuracy attribute_accuracy(std::span<const AttributeRecord> records,
                                            const MatchOptions& options = {}) {
  AttributeAccuracy result;
  long matches = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].attribute != records.front().attribute) {
      throw ValidationError("attribute_accuracy called with mixed attributes");
    }
    if (normalize_value(records[i].truth_value).empty()) continue;
    ++result.n_nonempty_truth;
    if (values_match(records[i].attribute, records[i].truth_value,
                     records[i].predicted_value, options)) {
      ++matches;
    }
  }
  if (result.n_nonempty_truth > 0) {
    result.accuracy = static_cast<double>(matches) /
                      static_cast<double>(result.n_nonempty_truth);
  }
  return result;
}

/// Equal-weight mean over the defined accuracies; undefined entries are
/// skipped (the caller sees them in the report's warnings).
inline double average_accuracy(const std::vector<std::optional<double>>& accuracies) {
  double sum = 0.0;
  int defined = 0;
  for (const auto& a : accuracies) {
    if (a.has_value()) {
      sum += *a;
      ++defined;
    }
  }
  if (defined == 0) {
    throw ValidationError("average over zero defined attribute accuracies");
  }
  return sum / defined;
}

struct EvalReport {
  std::map<Attribute, AttributeAccuracy> per_attribute;
  std::optional<double> average;
  std::vector<std::string> warnings;
  std::string source;  // file identity, kept so reports are self-describing
};

inline EvalReport evaluate_records(const std::vector<AttributeRecord>& records,
                                   const MatchOptions& options = {},
                                   std::string source = {}) {
  EvalReport report;
  report.source = std::move(source);
  std::map<Attribute, std::vector<AttributeRecord>> by_attribute;
  for (const auto& record : records) {
    by_attribute[record.attribute].push_back(record);
  }
  std::vector<std::optional<double>> accuracies;
  for (const auto& [attribute, group] : by_attribute) {
    AttributeAccuracy acc = attribute_accuracy(group, options);
    if (!acc.accuracy.has_value()) {
      report.warnings.push_back(std::string(to_string(attribute)) +
                                ": no non-empty ground truth; accuracy undefined");
    }
    accuracies.push_back(acc.accuracy);
    report.per_attribute[attribute] = acc;
  }
  const bool any_defined =
      std::any_of(accuracies.begin(), accuracies.end(),
                  [](const auto& a) { return a.has_value(); });
  if (any_defined) report.average = average_accuracy(accuracies);
  return report;
}

/// Loads a line-delimited record file: one JSON object per line with
/// page_id, page_class, attribute, truth_value, predicted_value.
inline std::vector<AttributeRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open record file: " + path.string());
  std::vector<AttributeRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError("record file " + path.string() + " line " +
                      std::to_string(line_number) + ": unparseable record");
    }
    try {
      AttributeRecord record;
      record.page_id = j.at("page_id").get<std::string>();
      record.page_class = page_class_from_string(j.at("page_class").get<std::string>());
      record.attribute = attribute_from_string(j.at("attribute").get<std::string>());
      record.truth_value = j.at("truth_value").get<std::string>();
      record.predicted_value = j.at("predicted_value").get<std::string>();
      record.validate();
      records.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("record file " + path.string() + " line " +
                      std::to_string(line_number) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("record file " + path.string() + " line " +
                      std::to_string(line_number) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace earlybo
