#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace recipe {

/// Interned symbol. Every identifier and enumeration value in a system
/// shares one table, so comparisons are integer comparisons.
using Sym = int32_t;

constexpr Sym kNoSym = -1;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SymbolTable {
 public:
  Sym intern(std::string_view text) {
    auto it = index_.find(std::string(text));
    if (it != index_.end()) return it->second;
    Sym s = static_cast<Sym>(names_.size());
    names_.emplace_back(text);
    index_.emplace(names_.back(), s);
    return s;
  }

  Sym find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    return it == index_.end() ? kNoSym : it->second;
  }

  const std::string& name(Sym s) const { return names_.at(static_cast<size_t>(s)); }

  size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Sym> index_;
};

/// A finite, ordered domain of symbolic constants. Booleans are the
/// two-valued special case (domain 0 of every system).
struct Domain {
  std::string name;
  std::vector<Sym> values;

  int index_of(Sym v) const {
    for (size_t i = 0; i < values.size(); ++i)
      if (values[i] == v) return static_cast<int>(i);
    return -1;
  }
  bool contains(Sym v) const { return index_of(v) >= 0; }
  int size() const { return static_cast<int>(values.size()); }
};

}  // namespace recipe
