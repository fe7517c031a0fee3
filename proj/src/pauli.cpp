// Copyright 2026 The rally-qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rally/errors.hpp"
#include "rally/qcore.hpp"

namespace rally {

namespace {

struct CompiledTerm {
  std::int64_t flip = 0;   // bits flipped by X and Y
  std::int64_t zmask = 0;  // bits contributing (-1)^b (Z and Y)
  int y_count = 0;
};

CompiledTerm compile(const PauliString& term, int n) {
  CompiledTerm out;
  std::int64_t seen = 0;
  for (const PauliFactor& f : term.factors) {
    if (f.axis == PauliAxis::I) continue;
    if (f.site < 0 || f.site >= n) {
      throw IndexOutOfRange("pauli_expand: site " + std::to_string(f.site) + " outside " +
                            std::to_string(n) + " sites");
    }
    const std::int64_t bit = std::int64_t{1} << f.site;
    if (seen & bit) {
      throw IndexOutOfRange("pauli_expand: site " + std::to_string(f.site) +
                            " repeated within one term");
    }
    seen |= bit;
    switch (f.axis) {
      case PauliAxis::X:
        out.flip |= bit;
        break;
      case PauliAxis::Y:
        out.flip |= bit;
        out.zmask |= bit;
        ++out.y_count;
        break;
      case PauliAxis::Z:
        out.zmask |= bit;
        break;
      case PauliAxis::I:
        break;
    }
  }
  return out;
}

}  // namespace

OperatorMatrix pauli_expand(std::span<const PauliString> terms, int n) {
  if (n < 1 || n > 20) {
    throw IndexOutOfRange("pauli_expand: unsupported site count " + std::to_string(n));
  }
  const std::int64_t dim = std::int64_t{1} << n;
  OperatorMatrix out = OperatorMatrix::Zero(dim, dim);
  for (const PauliString& term : terms) {
    const CompiledTerm c = compile(term, n);
    // Y = i X Z, so a string with k Y factors carries i^k on top of the
    // Z-type sign of the column bits.
    static constexpr Complex kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = term.coefficient * kIPowers[c.y_count % 4];
    for (std::int64_t col = 0; col < dim; ++col) {
      const int parity = __builtin_popcountll(static_cast<unsigned long long>(col & c.zmask)) & 1;
      out(col ^ c.flip, col) += parity ? -base : base;
    }
  }
  return out;
}

int pauli_site_count(std::span<const PauliString> terms) {
  int n = 1;
  for (const PauliString& term : terms) {
    for (const PauliFactor& f : term.factors) {
      if (f.axis != PauliAxis::I) n = std::max(n, f.site + 1);
    }
  }
  return n;
}

namespace {

PauliAxis parse_axis(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'x':
      return PauliAxis::X;
    case 'y':
      return PauliAxis::Y;
    case 'z':
      return PauliAxis::Z;
    case 'i':
      return PauliAxis::I;
    default:
      throw std::invalid_argument(std::string("unknown Pauli axis '") + c + "'");
  }
}

}  // namespace

std::vector<PauliString> parse_pauli_terms(std::istream& in) {
  std::vector<PauliString> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string coeff_text;
    if (!(tokens >> coeff_text)) continue;

    PauliString term;
    const char* first = coeff_text.data();
    const char* last = first + coeff_text.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, term.coefficient);
    if (ec != std::errc() || ptr != last) {
      throw ParseError(lineno, "invalid coefficient '" + coeff_text + "'");
    }

    std::string factor;
    bool identity = false;
    std::int64_t seen = 0;
    while (tokens >> factor) {
      if (factor == "I" || factor == "i") {
        identity = true;
        continue;
      }
      PauliFactor f;
      try {
        f.axis = parse_axis(factor.front());
      } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, e.what());
      }
      const char* s = factor.data() + 1;
      const char* e = factor.data() + factor.size();
      const auto [sp, sec] = std::from_chars(s, e, f.site);
      if (factor.size() < 2 || sec != std::errc() || sp != e || f.site < 0 || f.site > 62) {
        throw ParseError(lineno, "invalid factor '" + factor + "'");
      }
      const std::int64_t bit = std::int64_t{1} << f.site;
      if (seen & bit) {
        throw ParseError(lineno, "site " + std::to_string(f.site) + " repeated within one term");
      }
      seen |= bit;
      if (f.axis != PauliAxis::I) term.factors.push_back(f);
    }
    if (term.factors.empty() && !identity) {
      throw ParseError(lineno, "term has no factors; write identity terms as '<coeff> I'");
    }
    terms.push_back(std::move(term));
  }
  return terms;
}

std::vector<PauliString> read_pauli_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Pauli-term file '" + path + "'");
  return parse_pauli_terms(in);
}

void write_pauli_terms(std::ostream& out, std::span<const PauliString> terms) {
  static constexpr char kAxis[] = {'I', 'x', 'y', 'z'};
  const auto flags = out.flags();
  out << std::setprecision(17);
  for (const PauliString& term : terms) {
    out << term.coefficient;
    if (term.factors.empty()) out << " I";
    for (const PauliFactor& f : term.factors) {
      out << ' ' << kAxis[static_cast<int>(f.axis)] << f.site;
    }
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace rally
