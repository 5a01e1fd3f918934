#pragma once

#include "dkgqa/kg_store.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dkgqa {

enum class Split { train, validation, test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

struct SeedDocument {
    std::string doc_id;
    std::string text;
    Split split = Split::train;
};

struct Mention {
    std::size_t begin = 0;  // byte offsets into SeedDocument::text
    std::size_t end = 0;
    EntityId entity;
};

/// Entities of one seed text that exist in the store.
struct SeedEntitySet {
    std::string doc_id;
    std::vector<Mention> mentions;   // text order, non-overlapping
    std::vector<EntityId> entities;  // ascending, deduplicated
    std::size_t detected_total = 0;

    bool contains(EntityId e) const;
};

/// Substitution point for external NER/entity-linking systems.
class EntityLinker {
public:
    virtual ~EntityLinker() = default;
    virtual SeedEntitySet link(const SeedDocument& doc) const = 0;
};

struct LinkerOptions {
    bool strip_diacritics = false;
    /// Stop after this many mentions; 0 means unlimited.
    std::size_t max_mentions = 0;
};

/// Leftmost-longest, case-insensitive, word-boundary-aware dictionary match of
/// every store label against the text. Labels shared by several entities
/// link to the smallest EntityId.
class DictionaryLinker final : public EntityLinker {
public:
    /// Throws ConfigError when the store's label index is not enabled.
    explicit DictionaryLinker(const KnowledgeGraph& kg, LinkerOptions options = {});

    SeedEntitySet link(const SeedDocument& doc) const override;

    std::size_t label_count() const noexcept { return label_count_; }

private:
    static constexpr std::uint32_t kRoot = 0;
    static constexpr std::uint32_t kNoEntity = UINT32_MAX;

    std::uint32_t child(std::uint32_t node, char32_t cp) const;
    void insert(std::string_view folded_label, EntityId entity);

    LinkerOptions options_;
    std::vector<std::uint32_t> terminal_;  // per trie node: entity id or kNoEntity
    std::unordered_map<std::uint64_t, std::uint32_t> edges_;
    std::size_t label_count_ = 0;
};

SeedEntitySet link_entities(const SeedDocument& doc, const KnowledgeGraph& kg, LinkerOptions options = {});

}  // namespace dkgqa
