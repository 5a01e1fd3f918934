#include "dkgqa/seed_linker.hpp"

#include "dkgqa/errors.hpp"
#include "dkgqa/text.hpp"

#include <algorithm>

namespace dkgqa {

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "validation" || name == "valid" || name == "val") return Split::validation;
    if (name == "test") return Split::test;
    return std::nullopt;
}

bool SeedEntitySet::contains(EntityId e) const {
    return std::binary_search(entities.begin(), entities.end(), e);
}

namespace {

char32_t fold_cp(char32_t cp, bool strip) {
    if (strip) cp = text::strip_diacritic(cp);
    return text::fold_case(cp);
}

}  // namespace

DictionaryLinker::DictionaryLinker(const KnowledgeGraph& kg, LinkerOptions options) : options_(options) {
    if (!kg.label_index_enabled()) {
        throw ConfigError("entity linking requires the knowledge graph label index");
    }
    terminal_.push_back(kNoEntity);
    kg.for_each_label([this](std::string_view label, EntityId id) { insert(label, id); });
}

std::uint32_t DictionaryLinker::child(std::uint32_t node, char32_t cp) const {
    const auto it = edges_.find((static_cast<std::uint64_t>(node) << 32) | cp);
    return it == edges_.end() ? kNoEntity : it->second;
}

void DictionaryLinker::insert(std::string_view folded_label, EntityId entity) {
    std::uint32_t node = kRoot;
    for (const auto& c : text::decode_utf8(folded_label)) {
        const char32_t cp = text::is_space(c.value) ? U' ' : fold_cp(c.value, options_.strip_diacritics);
        const auto key = (static_cast<std::uint64_t>(node) << 32) | cp;
        const auto it = edges_.find(key);
        if (it != edges_.end()) {
            node = it->second;
        } else {
            const auto next = static_cast<std::uint32_t>(terminal_.size());
            terminal_.push_back(kNoEntity);
            edges_.emplace(key, next);
            node = next;
        }
    }
    if (node == kRoot) return;
    auto& slot = terminal_[node];
    if (slot == kNoEntity) ++label_count_;
    slot = std::min(slot, entity.value);
}

SeedEntitySet DictionaryLinker::link(const SeedDocument& doc) const {
    SeedEntitySet out;
    out.doc_id = doc.doc_id;
    const auto cps = text::decode_utf8(doc.text);
    const std::size_t n = cps.size();
    auto word = [&](std::size_t i) { return text::is_word_char(cps[i].value); };
    auto boundary = [&](std::size_t i) {
        return i == 0 || i == n || !word(i - 1) || !word(i);
    };

    std::size_t i = 0;
    while (i < n) {
        if (text::is_space(cps[i].value) || !boundary(i)) {
            ++i;
            continue;
        }
        std::uint32_t node = kRoot;
        std::size_t j = i;
        std::size_t best_end = 0;
        std::uint32_t best_entity = kNoEntity;
        while (j < n) {
            std::size_t step = 1;
            char32_t cp = fold_cp(cps[j].value, options_.strip_diacritics);
            if (text::is_space(cps[j].value)) {
                cp = U' ';
                while (j + step < n && text::is_space(cps[j + step].value)) ++step;
            }
            node = child(node, cp);
            if (node == kNoEntity) break;
            j += step;
            if (terminal_[node] != kNoEntity && boundary(j) && !text::is_space(cps[j - 1].value)) {
                best_end = j;
                best_entity = terminal_[node];
            }
        }
        if (best_entity == kNoEntity) {
            ++i;
            continue;
        }
        const std::size_t end_byte =
            best_end < n ? cps[best_end].byte_offset : doc.text.size();
        out.mentions.push_back(Mention{cps[i].byte_offset, end_byte, EntityId{best_entity}});
        out.entities.push_back(EntityId{best_entity});
        i = best_end;
        if (options_.max_mentions != 0 && out.mentions.size() >= options_.max_mentions) break;
    }
    out.detected_total = out.mentions.size();
    std::sort(out.entities.begin(), out.entities.end());
    out.entities.erase(std::unique(out.entities.begin(), out.entities.end()), out.entities.end());
    return out;
}

SeedEntitySet link_entities(const SeedDocument& doc, const KnowledgeGraph& kg, LinkerOptions options) {
    return DictionaryLinker(kg, options).link(doc);
}

}  // namespace dkgqa
