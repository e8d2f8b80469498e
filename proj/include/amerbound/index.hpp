#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace amerbound {

enum class Variant { bounded, extended };

inline const char* to_string(Variant v) { return v == Variant::bounded ? "bounded" : "extended"; }

// Named LP variable.  Maturities and transitions are 0-based: n indexes
// t_{n+1} in the usual 1-based notation, transition n runs from maturity n to n+1.
struct VarKey {
    enum class Kind : std::uint8_t { f, g1, g2, e1, e2, d1, d2, v };
    Kind kind;
    std::size_t j = 0;
    std::size_t k = 0;  // destination state for g
    std::size_t n = 0;

    std::string str() const {
        static const char* names[] = {"f", "g1", "g2", "e1", "e2", "d1", "d2", "v"};
        std::string s = names[static_cast<int>(kind)];
        s += "[" + std::to_string(j);
        if (kind == Kind::g1 || kind == Kind::g2) s += "," + std::to_string(k);
        return s + "," + std::to_string(n) + "]";
    }
};

// Bijection between LP columns and named variables.  S is the number of
// state rows: J+1 (bounded) or J+2 (extended, the last row is the tail).
class VariableIndex {
public:
    static constexpr std::size_t none = SIZE_MAX;

    VariableIndex() = default;
    VariableIndex(Variant variant, std::size_t S, std::size_t N)
        : variant_(variant), S_(S), N_(N), table_(8 * S * S * N, none) {}

    Variant variant() const { return variant_; }
    std::size_t states() const { return S_; }
    std::size_t maturities() const { return N_; }
    std::size_t size() const { return keys_.size(); }

    std::size_t add(VarKey key) {
        std::size_t& slot = table_.at(slot_of(key));
        if (slot != none) throw std::logic_error("variable added twice: " + key.str());
        slot = keys_.size();
        keys_.push_back(key);
        return slot;
    }

    // Column of a variable, or none when the variable is not part of the LP.
    std::size_t find(VarKey key) const {
        if (key.j >= S_ || key.k >= S_ || key.n >= N_) return none;
        return table_[slot_of(key)];
    }
    std::size_t at(VarKey key) const {
        std::size_t c = find(key);
        if (c == none) throw std::out_of_range("no LP column for " + key.str());
        return c;
    }
    const VarKey& key(std::size_t col) const { return keys_.at(col); }

private:
    std::size_t slot_of(const VarKey& key) const {
        return ((static_cast<std::size_t>(key.kind) * S_ + key.j) * S_ + key.k) * N_ + key.n;
    }

    Variant variant_ = Variant::bounded;
    std::size_t S_ = 0;
    std::size_t N_ = 0;
    std::vector<std::size_t> table_;
    std::vector<VarKey> keys_;
};

}  // namespace amerbound
