#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semcov/qa_items.hpp"

namespace semcov {

/// One structured record (a staff member, a course, ...). Attribute values
/// are uniformly lists; scalar JSON values ingest as one-element lists.
struct EntityRecord {
    std::string entity_id;
    std::string entity_type;
    std::map<std::string, std::vector<std::string>> attributes;

    bool has(const std::string& field) const;
    const std::vector<std::string>& values(const std::string& field) const;
};

class EntityStore {
public:
    void add(EntityRecord rec, const std::string& where = {});
    static EntityStore from_jsonl(const std::filesystem::path& path);

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<EntityRecord>& records() const { return records_; }
    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    const EntityRecord& by_id(const std::string& id) const;

    /// Distinct values of one field across the whole store, first-appearance
    /// order. Optionally restricted to one entity type.
    std::vector<std::string> field_values(const std::string& field,
                                          const std::string& entity_type = {}) const;

private:
    std::vector<EntityRecord> records_;
    std::map<std::string, std::size_t> index_;
};

/// Fill-in template for Binary and MCQ generation. `text` holds {field}
/// placeholders resolved against one entity; `target_field` is the attribute
/// the question asks about. For Binary the target placeholder is filled with
/// a true value (gold yes) or an impostor from other entities (gold no); for
/// MCQ the gold is the true value and the candidates add three impostors.
struct QaTemplate {
    std::string id;
    std::string entity_type; // empty = applies to every entity
    std::string text;
    std::string target_field;
};

/// Conjunctive relational pattern for MAQ generation: enumerate the value
/// combinations of `condition_fields` present in the store, and for each
/// combination the gold set is every entity whose attributes contain all the
/// combination's values. `answer_field` provides the candidate texts.
struct MaqPattern {
    std::string id;
    std::string entity_type;
    std::string text; // placeholders name the condition fields
    std::vector<std::string> condition_fields;
    std::string answer_field;
};

struct TemplateSet {
    std::vector<QaTemplate> binary;
    std::vector<QaTemplate> mcq;
    std::vector<MaqPattern> maq;

    static TemplateSet from_json_file(const std::filesystem::path& path);
    static TemplateSet from_json(const Json& j, const std::string& where);
};

/// Generation output: items plus human-readable warnings for skipped
/// templates/instances (single-valued fields, oversized gold sets, ...).
struct GenResult {
    std::vector<QAItem> items;
    std::vector<std::string> warnings;
};

/// Yes/no items at KM level, alternating positive/negative so the balance is
/// 50/50 within one item. Negatives replace the target value with a seeded
/// draw from the field's value pool over OTHER entities.
GenResult gen_binary(const EntityStore& store, const std::vector<QaTemplate>& templates,
                     std::size_t count, std::uint64_t seed);

/// 4-candidate single-gold items at KU level. Distractors are sampled
/// without replacement from the target field's global value pool, excluding
/// every value the subject entity itself holds.
GenResult gen_mcq(const EntityStore& store, const std::vector<QaTemplate>& templates,
                  std::size_t count, std::uint64_t seed);

/// 8-candidate multi-gold items; KU when the pattern has one condition, KA
/// for cross-attribute conjunctions. Instances whose gold set is empty or
/// exceeds 8 (the candidate count) are skipped, never truncated.
GenResult gen_maq(const EntityStore& store, const MaqPattern& pattern,
                  std::size_t count, std::uint64_t seed);

/// Pass-through of existing question/answer pairs (FAQ or forum dumps) to
/// KC-level Open items, deduplicated on whitespace-normalized question text.
/// source_tag must be "faq" or "forum" and becomes the provenance.
GenResult gen_open_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                              const std::string& source_tag);

/// Entities matching every (field, value) condition, in store order. The
/// in-memory stand-in for relational queries over the record schema.
std::vector<std::string> match_conjunction(
    const EntityStore& store,
    const std::vector<std::pair<std::string, std::string>>& conditions,
    const std::string& entity_type = {});

} // namespace semcov
