#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "confdiff/report.hpp"

using namespace confdiff;

TEST(JsonWriter, NestedStructure) {
  std::ostringstream out;
  JsonWriter json(out);
  json.begin_object().field("a", 0.1).field("b", std::uint64_t{3}).key("c").begin_array();
  json.value(1.0).value(std::numeric_limits<double>::quiet_NaN()).end_array();
  json.field("d", "x\"y").field("e", true).end_object();
  EXPECT_EQ(out.str(), R"({"a":0.10000000000000001,"b":3,"c":[1,null],"d":"x\"y","e":true})");
}

TEST(RunRecords, LineFormat) {
  RunResult r;
  r.epochs = {{0, 0.5, 0.75}, {1, -0.25, 0.8}};
  r.final_accuracy = 0.8;
  r.min_train_risk = -0.25;
  std::ostringstream out;
  write_run_records(out, r);
  EXPECT_EQ(out.str(),
            "epoch,train_risk,test_accuracy\n"
            "0,0.5,0.75\n"
            "1,-0.25,0.80000000000000004\n"
            "# summary epochs=2 final_accuracy=0.80000000000000004 min_train_risk=-0.25\n");
}

TEST(RunRecords, JsonIsDeterministic) {
  RunResult r;
  r.epochs = {{0, 0.5, 0.75}};
  r.final_accuracy = 0.75;
  r.min_train_risk = 0.5;
  std::ostringstream a, b;
  write_run_json(a, r);
  write_run_json(b, r);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("\"final_accuracy\":0.75"), std::string::npos);
}

TEST(Summarize, MeanAndSampleStdDev) {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std_dev, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(summarize({2.0}).std_dev, 0.0);
}
