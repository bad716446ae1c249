#ifndef DISCO_CHECKPOINT_HPP
#define DISCO_CHECKPOINT_HPP

// Textual container of named tensors. Values are written as C99 hex floats,
// so a save/load cycle is bit-exact.
//
//   tensors <count>
//   tensor <name> <rank> <dim_0> ... <dim_rank-1>
//   <value> <value> ...            (numel values, one line)

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "disco/error.hpp"
#include "disco/tensor.hpp"

namespace disco::ad {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

inline std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FormatError("checkpoint: bad number '" + s + "'");
  return v;
}

inline void write_tensors(std::ostream& out, const NamedTensors& tensors) {
  out << "tensors " << tensors.size() << '\n';
  for (const auto& [name, t] : tensors) {
    out << "tensor " << name << ' ' << t.rank();
    for (std::size_t d : t.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << hexfloat(t[i]);
    out << '\n';
  }
}

inline NamedTensors read_tensors(std::istream& in, bool requires_grad = true) {
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "tensors") throw FormatError("checkpoint: expected 'tensors <count>'");
  NamedTensors out;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> word >> name >> rank) || word != "tensor") {
      throw FormatError("checkpoint: malformed header of tensor " + std::to_string(k));
    }
    Shape shape(rank);
    for (std::size_t& d : shape) {
      if (!(in >> d)) throw FormatError("checkpoint: bad shape for '" + name + "'");
    }
    std::vector<double> values(numel(shape));
    for (double& v : values) {
      if (!(in >> word)) throw FormatError("checkpoint: truncated values for '" + name + "'");
      v = parse_hexfloat(word);
    }
    out.emplace_back(name, Tensor::from(std::move(shape), std::move(values), requires_grad));
  }
  return out;
}

}  // namespace disco::ad

#endif  // DISCO_CHECKPOINT_HPP
