#include "confdiff/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "confdiff/dataset_io.hpp"

namespace confdiff {

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_in_scope_.empty()) {
    if (!first_in_scope_.back()) out_ << ',';
    first_in_scope_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ << '{';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  first_in_scope_.pop_back();
  out_ << '}';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ << '[';
  first_in_scope_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  first_in_scope_.pop_back();
  out_ << ']';
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  value(name);
  out_ << ':';
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separate();
  if (std::isfinite(v)) {
    out_ << format_double(v);
  } else {
    out_ << "null";
  }
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  separate();
  out_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separate();
  out_ << '"';
  for (char ch : v) {
    switch (ch) {
      case '"': out_ << "\\\""; break;
      case '\\': out_ << "\\\\"; break;
      case '\n': out_ << "\\n"; break;
      case '\t': out_ << "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(ch));
          out_ << buf;
        } else {
          out_ << ch;
        }
    }
  }
  out_ << '"';
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separate();
  out_ << (v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(const std::vector<double>& v) {
  begin_array();
  for (double x : v) value(x);
  return end_array();
}

void write_run_records(std::ostream& out, const RunResult& result) {
  out << "epoch,train_risk,test_accuracy\n";
  for (const auto& e : result.epochs) {
    out << e.epoch << ',' << format_double(e.train_risk) << ',' << format_double(e.test_accuracy) << '\n';
  }
  out << "# summary epochs=" << result.epochs.size() << " final_accuracy=" << format_double(result.final_accuracy)
      << " min_train_risk=" << format_double(result.min_train_risk) << '\n';
}

void write_json(JsonWriter& json, const RunResult& result) {
  json.begin_object();
  json.key("epochs").begin_array();
  for (const auto& e : result.epochs) {
    json.begin_object()
        .field("epoch", static_cast<std::uint64_t>(e.epoch))
        .field("train_risk", e.train_risk)
        .field("test_accuracy", e.test_accuracy)
        .end_object();
  }
  json.end_array();
  json.field("final_accuracy", result.final_accuracy);
  json.field("min_train_risk", result.min_train_risk);
  json.end_object();
}

void write_run_json(std::ostream& out, const RunResult& result) {
  JsonWriter json(out);
  write_json(json, result);
  out << '\n';
}

void write_json(JsonWriter& json, const MCReport& r) {
  json.begin_object()
      .field("name", std::string_view(r.name))
      .field("estimate", r.estimate)
      .field("std_error", r.std_error)
      .field("reference", r.reference)
      .field("reference_std_error", r.reference_std_error)
      .field("z_score", r.z_score)
      .field("trials", static_cast<std::uint64_t>(r.trials))
      .end_object();
}

void write_json(JsonWriter& json, const VarianceProfile& p) {
  json.begin_object()
      .field("alphas", p.alphas)
      .field("variances", p.variances)
      .field("means", p.means)
      .field("quadratic_coefficient", p.quadratic_coefficient)
      .field("quadratic_intercept", p.quadratic_intercept)
      .field("half_column_max_abs_diff", p.half_column_max_abs_diff)
      .field("samples", static_cast<std::uint64_t>(p.samples))
      .end_object();
}

void write_json(JsonWriter& json, const ConvergenceReport& r) {
  json.begin_object();
  json.key("points").begin_array();
  for (const auto& p : r.points) {
    json.begin_object()
        .field("n", static_cast<std::uint64_t>(p.n))
        .field("mean_excess_risk", p.mean_excess_risk)
        .field("std_error", p.std_error)
        .field("per_seed", p.per_seed)
        .end_object();
  }
  json.end_array();
  json.field("bayes_error", r.bayes_error).field("slope", r.slope).end_object();
}

void write_json(JsonWriter& json, const RobustnessReport& r) {
  json.begin_object();
  json.key("cells").begin_array();
  for (const auto& c : r.cells) {
    json.begin_object()
        .field("prior_scale", c.noise.prior_scale)
        .field("conf_noise_std", c.noise.conf_noise_std)
        .field("mean_accuracy", c.mean_accuracy)
        .field("std_dev", c.std_dev)
        .field("std_error", c.std_error)
        .field("mean_abs_confidence_error", c.mean_abs_confidence_error)
        .field("prior_error", c.prior_error)
        .field("accuracies", c.accuracies)
        .end_object();
  }
  json.end_array();
  json.field("clean_passthrough_exact", r.clean_passthrough_exact).end_object();
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace confdiff
