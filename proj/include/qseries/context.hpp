#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace qseries {

struct VariableSpec {
    std::string name;
    unsigned weight = 1;
    std::optional<unsigned> nilpotency; // x^nilpotency == 0
};

// Exponents by variable name; absent names have exponent 0.
using Monomial = std::map<std::string, unsigned>;

class SeriesContext;
using ContextPtr = std::shared_ptr<const SeriesContext>;

ContextPtr make_context(std::vector<VariableSpec> vars, int order);

// Variables, truncation order and the enumeration of every admissible
// monomial. Monomials are numbered ("ranks") in graded-lex order: total
// weight first, then exponent vectors compared lexicographically in
// variable order. Each monomial also has a mixed-radix key, so the key of a
// product is the sum of keys whenever the product is admissible.
class SeriesContext {
public:
    int order() const { return order_; }
    const std::vector<VariableSpec>& variables() const { return vars_; }
    std::size_t num_variables() const { return vars_.size(); }

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return i;
        return std::nullopt;
    }
    bool has(std::string_view name) const { return index_of(name).has_value(); }

    std::size_t index_or_throw(std::string_view name) const
    {
        auto i = index_of(name);
        if (!i) throw context_error("unknown variable '" + std::string(name) + "'");
        return *i;
    }

    std::uint32_t size() const { return static_cast<std::uint32_t>(weight_.size()); }
    unsigned weight(std::uint32_t rank) const { return weight_[rank]; }
    std::uint64_t key(std::uint32_t rank) const { return key_[rank]; }
    unsigned exponent(std::uint32_t rank, std::size_t var) const { return exps_[rank * vars_.size() + var]; }
    std::uint64_t stride(std::size_t var) const { return stride_[var]; }

    // First rank of weight w, for 0 <= w <= order+1.
    std::uint32_t weight_start(unsigned w) const { return weight_start_[std::min<std::size_t>(w, weight_start_.size() - 1)]; }

    // Rank for a key known to be admissible; -1 otherwise.
    std::int64_t rank_of_key(std::uint64_t key) const
    {
        if (dense_) return key < dense_index_.size() ? dense_index_[key] : -1;
        auto it = sparse_index_.find(key);
        return it == sparse_index_.end() ? -1 : it->second;
    }

    // Nilpotency check for the product of two monomials.
    bool nil_compatible(std::uint32_t a, std::uint32_t b) const
    {
        if (nil_vars_.empty()) return true;
        std::uint64_t pa = nil_pack_[a], pb = nil_pack_[b];
        if (nil_binary_) return (pa & pb) == 0;
        std::uint64_t s = pa + pb;
        for (std::size_t j = 0; j < nil_vars_.size(); ++j)
            if (((s >> (8 * j)) & 0xff) >= nil_bound_[j]) return false;
        return true;
    }

    std::uint32_t rank_of(const Monomial& m) const
    {
        std::uint64_t k = 0;
        for (const auto& [name, e] : m) {
            auto i = index_of(name);
            if (!i) throw context_error("monomial uses unknown variable '" + name + "'");
            if (e == 0) continue;
            if (e >= radix_[*i]) throw context_error("monomial " + format(m) + " is outside the truncation box");
            k += stride_[*i] * e;
        }
        auto r = rank_of_key(k);
        if (r < 0) throw context_error("monomial " + format(m) + " is not admissible in this context");
        return static_cast<std::uint32_t>(r);
    }

    // Like rank_of, but reports inadmissible monomials as nullopt instead of throwing.
    std::optional<std::uint32_t> try_rank_of(const Monomial& m) const
    {
        std::uint64_t k = 0;
        for (const auto& [name, e] : m) {
            auto i = index_of(name);
            if (!i) throw context_error("monomial uses unknown variable '" + name + "'");
            if (e == 0) continue;
            if (e >= radix_[*i]) return std::nullopt;
            k += stride_[*i] * e;
        }
        auto r = rank_of_key(k);
        if (r < 0) return std::nullopt;
        return static_cast<std::uint32_t>(r);
    }

    Monomial monomial(std::uint32_t rank) const
    {
        Monomial m;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (unsigned e = exponent(rank, i)) m[vars_[i].name] = e;
        return m;
    }

    std::string format(std::uint32_t rank) const { return format(monomial(rank)); }

    std::string format(const Monomial& m) const
    {
        std::string out;
        auto put = [&](const std::string& name, unsigned e) {
            if (e == 0) return;
            if (!out.empty()) out += '*';
            out += name;
            if (e > 1) out += '^' + std::to_string(e);
        };
        for (const auto& v : vars_) {
            auto it = m.find(v.name);
            if (it != m.end()) put(it->first, it->second);
        }
        for (const auto& [name, e] : m)
            if (!has(name)) put(name, e);
        return out.empty() ? "1" : out;
    }

    // Weight of a monomial given by name; throws on unknown names.
    unsigned weight_of(const Monomial& m) const
    {
        unsigned w = 0;
        for (const auto& [name, e] : m) w += vars_[index_or_throw(name)].weight * e;
        return w;
    }

    bool same_shape(const SeriesContext& o) const
    {
        if (order_ != o.order_ || vars_.size() != o.vars_.size()) return false;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name != o.vars_[i].name || vars_[i].weight != o.vars_[i].weight ||
                vars_[i].nilpotency != o.vars_[i].nilpotency)
                return false;
        return true;
    }

private:
    friend ContextPtr make_context(std::vector<VariableSpec>, int);
    SeriesContext() = default;

    void build();

    int order_ = 0;
    std::vector<VariableSpec> vars_;
    std::vector<std::uint64_t> radix_, stride_;
    std::vector<std::uint16_t> weight_;
    std::vector<std::uint64_t> key_;
    std::vector<std::uint16_t> exps_;
    std::vector<std::uint32_t> weight_start_;

    bool dense_ = true;
    std::vector<std::int32_t> dense_index_;
    std::unordered_map<std::uint64_t, std::uint32_t> sparse_index_;

    std::vector<std::size_t> nil_vars_;
    std::vector<unsigned> nil_bound_;
    std::vector<std::uint64_t> nil_pack_;
    bool nil_binary_ = true;
};

inline void SeriesContext::build()
{
    const std::size_t nv = vars_.size();
    const unsigned N = static_cast<unsigned>(order_);
    radix_.resize(nv);
    stride_.resize(nv);
    std::uint64_t box = 1;
    for (std::size_t i = 0; i < nv; ++i) {
        const auto& v = vars_[i];
        std::uint64_t r = v.weight == 0 ? *v.nilpotency : N / v.weight + 1;
        if (v.nilpotency) r = std::min<std::uint64_t>(r, *v.nilpotency);
        radix_[i] = r;
        stride_[i] = box;
        if (__builtin_mul_overflow(box, r, &box)) throw context_error("context too large: monomial box overflows 64 bits");
    }

    struct Row {
        unsigned w;
        std::vector<std::uint16_t> e;
        std::uint64_t key;
    };
    std::vector<Row> rows;
    std::vector<std::uint16_t> cur(nv, 0);
    auto rec = [&](auto&& self, std::size_t i, unsigned w, std::uint64_t key) -> void {
        if (i == nv) {
            rows.push_back({w, cur, key});
            return;
        }
        for (std::uint64_t e = 0; e < radix_[i]; ++e) {
            unsigned nw = w + vars_[i].weight * static_cast<unsigned>(e);
            if (nw > N) break;
            cur[i] = static_cast<std::uint16_t>(e);
            self(self, i + 1, nw, key + stride_[i] * e);
        }
        cur[i] = 0;
    };
    rec(rec, 0, 0, 0);
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.w != b.w) return a.w < b.w;
        return a.e < b.e;
    });
    if (rows.size() >= (std::uint64_t{1} << 31)) throw context_error("context too large: too many monomials");

    weight_.reserve(rows.size());
    key_.reserve(rows.size());
    exps_.reserve(rows.size() * nv);
    for (const auto& r : rows) {
        weight_.push_back(static_cast<std::uint16_t>(r.w));
        key_.push_back(r.key);
        exps_.insert(exps_.end(), r.e.begin(), r.e.end());
    }
    weight_start_.assign(N + 2, static_cast<std::uint32_t>(rows.size()));
    for (std::size_t k = rows.size(); k-- > 0;) weight_start_[rows[k].w] = static_cast<std::uint32_t>(k);
    for (unsigned w = N + 1; w-- > 0;) weight_start_[w] = std::min(weight_start_[w], weight_start_[w + 1]);

    dense_ = box <= (std::uint64_t{1} << 23);
    if (dense_) {
        dense_index_.assign(box, -1);
        for (std::size_t k = 0; k < rows.size(); ++k) dense_index_[rows[k].key] = static_cast<std::int32_t>(k);
    } else {
        sparse_index_.reserve(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) sparse_index_.emplace(rows[k].key, static_cast<std::uint32_t>(k));
    }

    for (std::size_t i = 0; i < nv; ++i)
        if (vars_[i].nilpotency) {
            nil_vars_.push_back(i);
            nil_bound_.push_back(*vars_[i].nilpotency);
            if (*vars_[i].nilpotency != 2) nil_binary_ = false;
        }
    if (nil_vars_.size() > 8) throw context_error("at most 8 nilpotent variables are supported");
    if (!nil_vars_.empty()) {
        nil_pack_.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            std::uint64_t p = 0;
            for (std::size_t j = 0; j < nil_vars_.size(); ++j) {
                std::uint64_t e = rows[k].e[nil_vars_[j]];
                p |= nil_binary_ ? (e << j) : (e << (8 * j));
            }
            nil_pack_[k] = p;
        }
    }
}

// Builds a context over `vars` truncated at total weight `order`. The
// variable q (weight 1, unbounded) is prepended when not listed.
inline ContextPtr make_context(std::vector<VariableSpec> vars, int order)
{
    if (order < 0) throw context_error("truncation order must be non-negative");
    if (order > 4000) throw context_error("truncation order too large");
    auto qit = std::find_if(vars.begin(), vars.end(), [](const VariableSpec& v) { return v.name == "q"; });
    if (qit == vars.end()) {
        vars.insert(vars.begin(), VariableSpec{"q", 1, std::nullopt});
    } else if (qit->weight != 1 || qit->nilpotency) {
        throw context_error("q must have weight 1 and no nilpotency");
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (v.name.empty()) throw context_error("variable names must be non-empty");
        for (char ch : v.name)
            if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'))
                throw context_error("variable name '" + v.name + "' must be alphanumeric");
        for (std::size_t j = 0; j < i; ++j)
            if (vars[j].name == v.name) throw context_error("duplicate variable '" + v.name + "'");
        if (v.nilpotency && *v.nilpotency < 2) throw context_error("nilpotency of '" + v.name + "' must be at least 2");
        if (v.weight == 0 && !v.nilpotency)
            throw context_error("weight-0 variable '" + v.name + "' must be nilpotent");
        if (v.nilpotency && *v.nilpotency > 255) throw context_error("nilpotency of '" + v.name + "' is too large");
    }
    auto ctx = std::shared_ptr<SeriesContext>(new SeriesContext());
    ctx->order_ = order;
    ctx->vars_ = std::move(vars);
    ctx->build();
    return ctx;
}

// Parses "q^3*c*eps" or "1".
inline Monomial parse_monomial(std::string_view text)
{
    Monomial m;
    std::string s(text);
    if (s == "1") return m;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto star = s.find('*', pos);
        std::string part = s.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
        if (part.empty()) throw context_error("malformed monomial '" + s + "'");
        auto caret = part.find('^');
        std::string name = part.substr(0, caret);
        unsigned e = 1;
        if (caret != std::string::npos) {
            std::string ex = part.substr(caret + 1);
            if (ex.empty() || ex.find_first_not_of("0123456789") != std::string::npos)
                throw context_error("malformed monomial '" + s + "'");
            e = static_cast<unsigned>(std::stoul(ex));
        }
        if (name.empty()) throw context_error("malformed monomial '" + s + "'");
        m[name] += e;
        if (star == std::string::npos) break;
        pos = star + 1;
    }
    return m;
}

} // namespace qseries
