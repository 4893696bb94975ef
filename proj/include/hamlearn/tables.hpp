#pragma once

// Tabulated (noisy) Gibbs expectation values feeding the constraint matrices:
// Ctilde_{ij} ~ omega(P_i P_j) and Btilde_alpha_{ij} ~ omega(P_i [E_alpha, P_j]).

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hamlearn {

struct ExpectationTable {
  int r = 0;
  int m = 0;
  Eigen::MatrixXcd C;               // r x r, Hermitian by construction
  std::vector<Eigen::MatrixXcd> B;  // m matrices, r x r, not Hermitian in general
  double epsilon0 = 0.0;
  std::string noise_mode = "exact";
  std::uint64_t seed = 0;
  int clipped_count = 0;  // estimates pulled back onto their a priori bounds
};

// CSV schema: kind,i,j,alpha,re,im with kind in {C,B}; alpha is -1 for C rows.
inline void write_table_csv(const ExpectationTable& table, std::ostream& os) {
  os << "kind,i,j,alpha,re,im\n";
  char buf[96];
  auto row = [&](char kind, int i, int j, int alpha, const std::complex<double>& v) {
    std::snprintf(buf, sizeof(buf), "%c,%d,%d,%d,%.17g,%.17g\n", kind, i, j, alpha,
                  v.real(), v.imag());
    os << buf;
  };
  for (int i = 0; i < table.r; ++i)
    for (int j = 0; j < table.r; ++j) row('C', i, j, -1, table.C(i, j));
  for (int a = 0; a < table.m; ++a)
    for (int i = 0; i < table.r; ++i)
      for (int j = 0; j < table.r; ++j) row('B', i, j, a, table.B[a](i, j));
}

inline void write_table_csv(const ExpectationTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_table_csv(table, os);
}

inline ExpectationTable read_table_csv(std::istream& is, int r, int m) {
  ExpectationTable table;
  table.r = r;
  table.m = m;
  table.C = Eigen::MatrixXcd::Zero(r, r);
  table.B.assign(m, Eigen::MatrixXcd::Zero(r, r));
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string kind, cell;
    std::getline(ss, kind, ',');
    std::getline(ss, cell, ',');
    const int i = std::stoi(cell);
    std::getline(ss, cell, ',');
    const int j = std::stoi(cell);
    std::getline(ss, cell, ',');
    const int alpha = std::stoi(cell);
    std::getline(ss, cell, ',');
    const double re = std::stod(cell);
    std::getline(ss, cell, ',');
    const double im = std::stod(cell);
    if (kind == "C") table.C(i, j) = {re, im};
    else if (kind == "B") table.B.at(alpha)(i, j) = {re, im};
    else throw std::runtime_error("table csv: unknown kind " + kind);
  }
  return table;
}

}  // namespace hamlearn
