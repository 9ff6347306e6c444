#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "confdiff/trainer.hpp"
#include "confdiff/verify.hpp"

namespace confdiff {

/// Minimal streaming JSON emitter. Doubles are written with 17 significant
/// digits; non-finite values become null.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(const std::vector<double>& v);

  template <typename T>
  JsonWriter& field(std::string_view name, const T& v) {
    key(name);
    return value(v);
  }

 private:
  void separate();

  std::ostream& out_;
  std::vector<bool> first_in_scope_;
  bool after_key_ = false;
};

// RunResult record format:
//   epoch,train_risk,test_accuracy
//   0,<risk>,<accuracy>
//   ...
//   # summary epochs=<E> final_accuracy=<a> min_train_risk=<r>
void write_run_records(std::ostream& out, const RunResult& result);
void write_run_json(std::ostream& out, const RunResult& result);
void write_json(JsonWriter& json, const RunResult& result);

void write_json(JsonWriter& json, const MCReport& report);
void write_json(JsonWriter& json, const VarianceProfile& profile);
void write_json(JsonWriter& json, const ConvergenceReport& report);
void write_json(JsonWriter& json, const RobustnessReport& report);

/// mean and sample standard deviation.
struct Summary {
  double mean = 0.0;
  double std_dev = 0.0;
};
Summary summarize(const std::vector<double>& values);

}  // namespace confdiff
