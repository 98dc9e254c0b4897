#include "blockfn/coding_seq.hpp"

#include <algorithm>

#include <json.hpp>

namespace blockfn {

OrderMap OrderMap::identity(Interval d) {
    OrderMap m;
    m.domain = d;
    for (std::int64_t x = d.lo; x <= d.hi; ++x) m.image.push_back(x);
    return m;
}

OrderMap OrderMap::then(const OrderMap& next) const {
    OrderMap m;
    m.domain = domain;
    m.image.reserve(image.size());
    for (std::int64_t y : image) m.image.push_back(next(y));
    return m;
}

OrderMap OrderMap::restrict(Interval d) const {
    if (d.lo < domain.lo || d.hi > domain.hi) throw BlockError("restriction outside the domain");
    OrderMap m;
    m.domain = d;
    m.image.assign(image.begin() + (d.lo - domain.lo), image.begin() + (d.hi - domain.lo + 1));
    return m;
}

const char* to_string(Strength s) { return s == Strength::Strong ? "strong" : "weak"; }

bool canonical_less(const CodingSequence& a, const CodingSequence& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    if (a.length() == 0) return false;
    if (a.intervals.back().hi != b.intervals.back().hi) return a.intervals.back().hi < b.intervals.back().hi;
    for (std::size_t i = 0; i < a.length(); ++i) {
        const auto& x = a.intervals[i];
        const auto& y = b.intervals[i];
        if (x.lo != y.lo) return x.lo < y.lo;
        if (x.hi != y.hi) return x.hi < y.hi;
    }
    for (std::size_t i = 0; i < a.maps.size(); ++i) {
        if (a.maps[i].image != b.maps[i].image) return a.maps[i].image < b.maps[i].image;
    }
    return false;
}

// ---- FView -------------------------------------------------------------------

void FView::grow_to(std::int64_t x) {
    if (x < 0) throw BlockError("negative position");
    while (starts_.back() <= x) {
        TypeRef t = f_->type_at(types_.size());
        types_.push_back(t);
        starts_.push_back(starts_.back() + t->size());
    }
}

PlacedBlock FView::block(std::int64_t x) {
    grow_to(x);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
    const std::size_t b = static_cast<std::size_t>(it - starts_.begin()) - 1;
    return PlacedBlock{{starts_[b], starts_[b + 1] - 1}, b, types_[b]};
}

std::int64_t FView::f(std::int64_t x) {
    PlacedBlock b = block(x);
    return b.interval.lo + b.type->map[x - b.interval.lo];
}

bool FView::is_block_start(std::int64_t x) { return block(x).interval.lo == x; }
bool FView::is_block_end(std::int64_t x) { return block(x).interval.hi == x; }

// ---- validation ----------------------------------------------------------------

bool preserves_f(FView& fv, const OrderMap& m) {
    for (std::int64_t x = m.domain.lo; x <= m.domain.hi; ++x) {
        const std::int64_t fx = fv.f(x);
        if (fx < m.domain.lo || fx > m.domain.hi) return false;
        if (fv.f(m(x)) != m(fx)) return false;
    }
    return true;
}

bool preserves_f(const BlockFunction& f, const OrderMap& m) {
    FView fv(f);
    return preserves_f(fv, m);
}

namespace {

ValidationReport fail(int cond, std::size_t index, std::int64_t point, std::string msg) {
    ValidationReport r;
    r.ok = false;
    r.condition = cond;
    r.index = static_cast<int>(index);
    r.point = point;
    r.message = std::move(msg);
    return r;
}

std::optional<std::int64_t> first_unpreserved(FView& fv, const OrderMap& m) {
    for (std::int64_t x = m.domain.lo; x <= m.domain.hi; ++x) {
        const std::int64_t fx = fv.f(x);
        if (fx < m.domain.lo || fx > m.domain.hi || fv.f(m(x)) != m(fx)) return x;
    }
    return std::nullopt;
}

}  // namespace

ValidationReport validate(const BlockFunction& f, const CodingSequence& seq) {
    return validate(f, seq, seq.strength);
}

ValidationReport validate(const BlockFunction& f, const CodingSequence& seq, Strength s) {
    FView fv(f);
    const std::size_t n = seq.length();
    for (std::size_t i = 0; i < n; ++i) {
        const Interval& iv = seq.intervals[i];
        if (iv.lo < 0 || iv.hi < iv.lo) return fail(1, i + 1, iv.lo, "empty or negative interval");
        if (!fv.is_block_start(iv.lo)) return fail(1, i + 1, iv.lo, "interval does not start a block");
        if (!fv.is_block_end(iv.hi)) return fail(1, i + 1, iv.hi, "interval does not end a block");
    }
    if (seq.maps.size() + 1 != n && !(n == 0 && seq.maps.empty())) {
        return fail(2, seq.maps.size(), -1, "map count must be one less than interval count");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const OrderMap& m = seq.maps[i];
        const Interval& d = seq.intervals[i];
        const Interval& c = seq.intervals[i + 1];
        if (!(m.domain == d) || static_cast<std::int64_t>(m.image.size()) != d.size()) {
            return fail(2, i + 1, d.lo, "map domain differs from its interval");
        }
        for (std::int64_t x = d.lo; x <= d.hi; ++x) {
            const std::int64_t y = m(x);
            if (y < x) return fail(2, i + 1, x, "map decreases a point");
            if (y < c.lo || y > c.hi) return fail(2, i + 1, x, "image outside the next interval");
            if (x > d.lo && y <= m(x - 1)) return fail(2, i + 1, x, "map is not strictly increasing");
        }
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
        const OrderMap two = seq.maps[i].then(seq.maps[i + 1]);
        if (auto x = first_unpreserved(fv, two)) return fail(3, i + 1, *x, "two-step composite breaks f");
    }
    if (n >= 2 && preserves_f(fv, seq.maps[0])) return fail(4, 1, -1, "first map preserves f");
    if (s == Strength::Strong) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (seq.intervals[i + 1].lo <= seq.intervals[i].hi) {
                return fail(5, i + 2, seq.intervals[i + 1].lo, "interval does not lie above its predecessor");
            }
        }
    }
    return {};
}

OrderMap compose(const CodingSequence& seq, std::size_t i, std::size_t j) {
    if (i < 1 || j > seq.length() || i >= j) throw BlockError("compose index out of range");
    OrderMap m = seq.maps[i - 1];
    for (std::size_t k = i + 1; k < j; ++k) m = m.then(seq.maps[k - 1]);
    return m;
}

// ---- strengthening ----------------------------------------------------------------

namespace {

Interval block_closure(FView& fv, std::int64_t lo, std::int64_t hi) {
    return {fv.block(lo).interval.lo, fv.block(hi).interval.hi};
}

struct Plan {
    std::int64_t trimmed_lo = -1;
    std::size_t second = 0;  // 1-based index of the second output interval
};

std::optional<Plan> plan_first_step(FView& fv, const CodingSequence& seq) {
    const std::size_t n = seq.length();
    if (n < 2) return std::nullopt;
    const Interval first = seq.intervals[0];
    // Least block start whose image clears b_1 at some even index.
    for (std::int64_t lo = first.lo; lo <= first.hi; lo = fv.block(lo).interval.hi + 1) {
        for (std::size_t j = 2; j <= n; j += 2) {
            const OrderMap whole = compose(seq, 1, j);
            if (whole(lo) > first.hi && !preserves_f(fv, whole.restrict({lo, first.hi}))) return Plan{lo, j};
        }
    }
    return std::nullopt;
}

}  // namespace

bool increase_certifiable(const BlockFunction& f, const CodingSequence& seq) {
    FView fv(f);
    return plan_first_step(fv, seq).has_value();
}

Strengthened strengthen_traced(const BlockFunction& f, const CodingSequence& seq) {
    Strengthened out;
    if (validate(f, seq, Strength::Strong).ok) {
        out.seq = seq;
        out.seq.strength = Strength::Strong;
        for (std::size_t i = 1; i <= seq.length(); ++i) out.source_index.push_back(i);
        return out;
    }
    const ValidationReport weak = validate(f, seq, Strength::Weak);
    if (!weak.ok) throw BlockError("strengthen needs a valid weak sequence: " + weak.message);
    FView fv(f);
    auto plan = plan_first_step(fv, seq);
    if (!plan) throw BlockError("increase condition not certifiable within the sequence");

    Interval cur{plan->trimmed_lo, seq.intervals[0].hi};
    std::size_t cur_index = 1;
    std::size_t next_index = plan->second;
    out.seq.strength = Strength::Strong;
    out.seq.intervals.push_back(cur);
    out.source_index.push_back(1);
    while (next_index != 0) {
        const OrderMap step = compose(seq, cur_index, next_index).restrict(cur);
        const Interval img = block_closure(fv, step.image.front(), step.image.back());
        out.seq.maps.push_back(step);
        out.seq.intervals.push_back(img);
        out.source_index.push_back(next_index);
        cur = img;
        cur_index = next_index;
        next_index = 0;
        for (std::size_t j = cur_index + 1; j <= seq.length(); j += 2) {
            if (compose(seq, cur_index, j).restrict(cur).image.front() > cur.hi) {
                next_index = j;
                break;
            }
        }
    }
    if (preserves_f(fv, out.seq.maps.front())) throw BlockError("trimmed first map preserves f");
    return out;
}

CodingSequence strengthen(const BlockFunction& f, const CodingSequence& seq) {
    return strengthen_traced(f, seq).seq;
}

// ---- links -----------------------------------------------------------------------------

std::vector<LinkReport> link_analysis(const BlockFunction& f, const CodingSequence& seq) {
    FView fv(f);
    std::vector<LinkReport> out;
    for (std::size_t i = 1; i <= seq.length(); ++i) {
        const Interval iv = seq.intervals[i - 1];
        for (std::int64_t lo = iv.lo; lo <= iv.hi;) {
            const Interval b = fv.block(lo).interval;
            LinkReport rep;
            rep.witnessed_at = i;
            for (std::int64_t x = b.lo; x <= b.hi; ++x) rep.link.push_back(x);
            for (std::size_t j = i + 1; j <= seq.length(); ++j) {
                const OrderMap m = compose(seq, i, j).restrict(b);
                const std::int64_t first = m.image.front();
                const std::int64_t last = m.image.back();
                if (!rep.vulnerable_at && !(fv.block(first).interval == fv.block(last).interval)) {
                    rep.vulnerable_at = j;
                }
                if (!rep.broken_at && last - first > b.hi - b.lo) rep.broken_at = j;
            }
            out.push_back(std::move(rep));
            lo = b.hi + 1;
        }
    }
    return out;
}

bool has_vulnerable_link(const BlockFunction& f, const CodingSequence& seq) {
    for (const auto& r : link_analysis(f, seq)) {
        if (r.vulnerable_at) return true;
    }
    return false;
}

// ---- text form ---------------------------------------------------------------------------

std::string to_text(const CodingSequence& seq) {
    nlohmann::json j;
    j["strength"] = to_string(seq.strength);
    j["intervals"] = nlohmann::json::array();
    for (const auto& iv : seq.intervals) j["intervals"].push_back({iv.lo, iv.hi});
    j["maps"] = nlohmann::json::array();
    for (const auto& m : seq.maps) j["maps"].push_back(m.image);
    return j.dump();
}

CodingSequence from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw BlockError(std::string("coding sequence parse error: ") + e.what());
    }
    CodingSequence seq;
    try {
        const std::string s = j.value("strength", "weak");
        if (s != "weak" && s != "strong") throw BlockError("strength must be weak or strong");
        seq.strength = s == "strong" ? Strength::Strong : Strength::Weak;
        for (const auto& iv : j.at("intervals")) {
            seq.intervals.push_back({iv.at(0).get<std::int64_t>(), iv.at(1).get<std::int64_t>()});
        }
        const auto& maps = j.at("maps");
        for (std::size_t i = 0; i < maps.size(); ++i) {
            if (i >= seq.intervals.size()) throw BlockError("more maps than intervals");
            OrderMap m;
            m.domain = seq.intervals[i];
            m.image = maps[i].get<std::vector<std::int64_t>>();
            seq.maps.push_back(std::move(m));
        }
    } catch (const nlohmann::json::exception& e) {
        throw BlockError(std::string("coding sequence schema error: ") + e.what());
    }
    return seq;
}

}  // namespace blockfn
