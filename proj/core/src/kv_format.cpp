#include "psusp/kv_format.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "psusp/errors.hpp"

namespace psusp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

KvDocument KvDocument::parse(std::string_view text) {
    KvDocument doc;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (eol == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::ParseError, fmt::format("line {}: expected 'key = value'", line_no));
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error(Errc::ParseError, fmt::format("line {}: empty key", line_no));
        if (doc.find(key) != nullptr) {
            throw Error(Errc::ParseError, fmt::format("line {}: key '{}' repeated", line_no, key));
        }
        doc.entries_.push_back({std::string(key), std::string(value), line_no});
        if (eol == text.size()) break;
    }
    return doc;
}

const KvEntry* KvDocument::find(std::string_view key) const noexcept {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const KvEntry& e) { return e.key == key; });
    return it == entries_.end() ? nullptr : &*it;
}

const KvEntry& KvDocument::require(std::string_view key) const {
    if (const auto* e = find(key)) return *e;
    throw Error(Errc::ParseError, fmt::format("missing required key '{}'", key));
}

std::vector<const KvEntry*> KvDocument::with_prefix(std::string_view prefix) const {
    std::vector<const KvEntry*> out;
    for (const auto& e : entries_) {
        if (e.key.size() > prefix.size() && e.key.compare(0, prefix.size(), prefix) == 0) out.push_back(&e);
    }
    return out;
}

void KvDocument::set(std::string key, std::string value) {
    for (auto& e : entries_) {
        if (e.key == key) {
            e.value = std::move(value);
            return;
        }
    }
    const int line = entries_.empty() ? 1 : entries_.back().line + 1;
    entries_.push_back({std::move(key), std::move(value), line});
}

std::string KvDocument::to_string() const {
    std::string out;
    for (const auto& e : entries_) out += fmt::format("{} = {}\n", e.key, e.value);
    return out;
}

void throw_at(const KvEntry& entry, std::string_view reason) {
    throw Error(Errc::ParseError, fmt::format("line {}: key '{}': {}", entry.line, entry.key, reason));
}

double parse_real(const KvEntry& entry) {
    const auto v = trim(entry.value);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        throw_at(entry, fmt::format("'{}' is not a real number", entry.value));
    }
    return out;
}

long long parse_integer(const KvEntry& entry) {
    const auto v = trim(entry.value);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        throw_at(entry, fmt::format("'{}' is not an integer", entry.value));
    }
    return out;
}

std::vector<long long> parse_integer_list(const KvEntry& entry) {
    std::vector<long long> out;
    for (auto tok : split_ws(entry.value)) {
        // Ranges `a..b` expand inclusively.
        if (const auto dots = tok.find(".."); dots != std::string_view::npos) {
            KvEntry lo{entry.key, std::string(tok.substr(0, dots)), entry.line};
            KvEntry hi{entry.key, std::string(tok.substr(dots + 2)), entry.line};
            const auto a = parse_integer(lo);
            const auto b = parse_integer(hi);
            if (b < a) throw_at(entry, fmt::format("empty range '{}'", tok));
            for (auto i = a; i <= b; ++i) out.push_back(i);
            continue;
        }
        KvEntry one{entry.key, std::string(tok), entry.line};
        out.push_back(parse_integer(one));
    }
    return out;
}

IntervalSet parse_set(const KvEntry& entry) {
    try {
        return IntervalSet::parse(entry.value);
    } catch (const Error& e) {
        throw_at(entry, e.what());
    }
}

BaseSystem parse_system(const KvDocument& doc) {
    const auto& sys = doc.require("system");
    if (sys.value == "boole") return BaseSystem::boole();
    if (sys.value == "integer") {
        long long step = 1;
        if (const auto* e = doc.find("integer.step")) {
            step = parse_integer(*e);
            if (step == 0) throw_at(*e, "step must be nonzero");
        }
        return BaseSystem::integer_translation(step);
    }
    if (sys.value == "rankone") {
        RankOneSpec spec;
        const auto& cuts = doc.require("rankone.cuts");
        for (auto c : parse_integer_list(cuts)) spec.cuts.push_back(static_cast<int>(c));
        for (std::size_t k = 0; k < spec.cuts.size(); ++k) {
            const auto key = fmt::format("rankone.spacers.{}", k);
            std::vector<int> row(static_cast<std::size_t>(spec.cuts[k]), 0);
            if (const auto* e = doc.find(key)) {
                row.clear();
                for (auto s : parse_integer_list(*e)) row.push_back(static_cast<int>(s));
            }
            spec.spacers.push_back(std::move(row));
        }
        if (const auto* e = doc.find("rankone.base_width")) spec.base_width = parse_real(*e);
        try {
            return BaseSystem::rank_one(std::move(spec));
        } catch (const Error& e) {
            throw_at(cuts, e.what());
        }
    }
    throw_at(sys, fmt::format("unknown system '{}' (expected integer, boole or rankone)", sys.value));
}

void write_system(KvDocument& doc, const BaseSystem& system) {
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, IntegerTranslation>) {
                doc.set("system", "integer");
                doc.set("integer.step", std::to_string(s.step));
            } else if constexpr (std::is_same_v<S, BooleMap>) {
                doc.set("system", "boole");
            } else {
                doc.set("system", "rankone");
                doc.set("rankone.cuts", fmt::format("{}", fmt::join(s.spec.cuts, " ")));
                for (std::size_t k = 0; k < s.spec.spacers.size(); ++k) {
                    doc.set(fmt::format("rankone.spacers.{}", k), fmt::format("{}", fmt::join(s.spec.spacers[k], " ")));
                }
                doc.set("rankone.base_width", fmt::format("{}", s.spec.base_width));
            }
        },
        system.variant());
}

}  // namespace psusp
