#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "confdiff/types.hpp"

namespace confdiff {

// Line-oriented text formats. Every number is written with 17 significant
// digits, so a write/read cycle reproduces the doubles exactly.
//
//   # confdiff d=<d> n=<n> prior=<pi+>
//   x_1,...,x_d,x'_1,...,x'_d,c            (one line per pair)
//
//   # pcomp d=<d> n=<n> prior=<pi+>
//   x_1,...,x_d,x'_1,...,x'_d
//
//   # labeled d=<d> n=<m>
//   x_1,...,x_d,y                          (y is +1 or -1)
//
//   # soft d=<d> n=<m>
//   x_1,...,x_d,r

std::string format_double(double v);

void write_confdiff(std::ostream& out, const ConfDiffDataset& data);
void write_pcomp(std::ostream& out, const PcompDataset& data);
void write_labeled(std::ostream& out, const std::vector<LabeledExample>& data);
void write_soft_labeled(std::ostream& out, const std::vector<SoftLabeledExample>& data);

// Readers throw InvalidInput on malformed headers, field counts, or values.
ConfDiffDataset read_confdiff(std::istream& in);
PcompDataset read_pcomp(std::istream& in);
std::vector<LabeledExample> read_labeled(std::istream& in);
std::vector<SoftLabeledExample> read_soft_labeled(std::istream& in);

void save_confdiff(const std::string& path, const ConfDiffDataset& data);
ConfDiffDataset load_confdiff(const std::string& path);
void save_labeled(const std::string& path, const std::vector<LabeledExample>& data);
std::vector<LabeledExample> load_labeled(const std::string& path);

}  // namespace confdiff
