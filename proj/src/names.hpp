#pragma once

// Enum <-> name tables shared by the harness and the command-line layer.

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include "entlyap/error.hpp"

namespace entlyap::detail {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, const char*>, N>;

template <class E, std::size_t N>
std::string name_of(E value, const NameTable<E, N>& table) {
  for (const auto& [v, n] : table) {
    if (v == value) return n;
  }
  throw ParameterError("unnamed enumerator");
}

template <class E, std::size_t N>
E parse_name(std::string_view name, const NameTable<E, N>& table, const char* what) {
  for (const auto& [v, n] : table) {
    if (name == n) return v;
  }
  std::string known;
  for (const auto& entry : table) known += std::string(known.empty() ? "" : ", ") + entry.second;
  throw ParameterError("unknown " + std::string(what) + " '" + std::string(name) + "' (expected one of " + known + ")");
}

}  // namespace entlyap::detail
