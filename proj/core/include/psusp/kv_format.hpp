#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "psusp/base_system.hpp"
#include "psusp/interval_set.hpp"

namespace psusp {

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// Plain-text `key = value` document. `#` starts a comment; blank lines are
/// ignored; keys are unique. Diagnostics carry the 1-based line number.
class KvDocument {
public:
    static KvDocument parse(std::string_view text);

    const KvEntry* find(std::string_view key) const noexcept;
    bool contains(std::string_view key) const noexcept { return find(key) != nullptr; }
    /// Throws ParseError naming the key when absent.
    const KvEntry& require(std::string_view key) const;
    std::vector<const KvEntry*> with_prefix(std::string_view prefix) const;
    const std::vector<KvEntry>& entries() const noexcept { return entries_; }

    void set(std::string key, std::string value);
    std::string to_string() const;

private:
    std::vector<KvEntry> entries_;
};

/// Error text of the form `line 3: key 'set': <reason>`.
[[noreturn]] void throw_at(const KvEntry& entry, std::string_view reason);

double parse_real(const KvEntry& entry);
long long parse_integer(const KvEntry& entry);
std::vector<long long> parse_integer_list(const KvEntry& entry);
IntervalSet parse_set(const KvEntry& entry);

/// Reads `system = integer|boole|rankone` with its `integer.*` / `rankone.*` keys.
BaseSystem parse_system(const KvDocument& doc);
void write_system(KvDocument& doc, const BaseSystem& system);

}  // namespace psusp
