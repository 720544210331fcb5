// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace egtsyn::metrics {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t n() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// A sample is predicted positive when score >= threshold.
Confusion confusion_counts(std::span<const int> labels, std::span<const double> scores,
                           double threshold = 0.5);

// Count metrics. An empty optional marks a zero denominator.
std::optional<double> accuracy(const Confusion& c);
std::optional<double> true_positive_rate(const Confusion& c);
std::optional<double> true_negative_rate(const Confusion& c);
std::optional<double> precision(const Confusion& c);
std::optional<double> balanced_accuracy(const Confusion& c);
std::optional<double> kappa(const Confusion& c);

/// Mann-Whitney form of the ROC area (ties count one half), via rank sums.
/// Empty when only one class is present.
std::optional<double> roc_auc(std::span<const int> labels, std::span<const double> scores);
/// Average precision with tied scores processed as one block. Empty when
/// there are no positives.
std::optional<double> pr_auc(std::span<const int> labels, std::span<const double> scores);

struct MetricsReport {
  std::optional<double> roc_auc, pr_auc, acc, bacc, prec, tpr, kappa;
  Confusion confusion;
  std::size_t n = 0;
  double threshold = 0.5;
};

MetricsReport evaluate_scores(std::span<const int> labels, std::span<const double> scores,
                              double threshold = 0.5);

/// Structured JSON document; undefined metrics are written as null.
std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);
/// Two-column `metric,value` listing; undefined metrics read "undefined".
std::string report_to_csv(const MetricsReport& report);

struct Aggregate {
  std::optional<double> mean;
  std::optional<double> sd;  // sample standard deviation; empty below two values
  std::size_t count = 0;
};

/// Mean and sample standard deviation over the defined values.
Aggregate aggregate(std::span<const std::optional<double>> values);
/// "0.94±0.05" style cell; "undefined" when no fold defined the metric.
std::string format_aggregate(const Aggregate& a, int decimals = 2);

}  // namespace egtsyn::metrics
