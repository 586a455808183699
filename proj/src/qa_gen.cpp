#include "semcov/qa_gen.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "semcov/errors.hpp"
#include "semcov/rng.hpp"

namespace semcov {

namespace {

// {field} occurrences in template text, in order, duplicates kept.
std::vector<std::string> placeholders(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string::npos) {
        const std::size_t end = text.find('}', pos + 1);
        if (end == std::string::npos) break;
        out.push_back(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

std::string render(const std::string& text,
                   const std::map<std::string, std::string>& values,
                   const std::string& where) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] == '{') {
            const std::size_t end = text.find('}', pos + 1);
            if (end == std::string::npos) {
                out += text.substr(pos);
                break;
            }
            const std::string field = text.substr(pos + 1, end - pos - 1);
            auto it = values.find(field);
            if (it == values.end())
                throw ValidationError(where + ": unresolved placeholder {" + field + "}");
            out += it->second;
            pos = end + 1;
        } else {
            out += text[pos++];
        }
    }
    return out;
}

bool type_matches(const EntityRecord& e, const std::string& entity_type) {
    return entity_type.empty() || e.entity_type == entity_type;
}

// Seeded sample of `k` distinct elements, order randomized.
std::vector<std::string> sample_without_replacement(std::vector<std::string> pool,
                                                    std::size_t k, Rng& rng) {
    rng.shuffle(pool);
    pool.resize(k);
    return pool;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool in_gap = true; // swallows leading whitespace
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in_gap = true;
        } else {
            if (in_gap && !out.empty()) out += ' ';
            in_gap = false;
            out += c;
        }
    }
    return out;
}

struct TemplateContext {
    const QaTemplate* tpl;
    std::vector<std::size_t> entities;  // store indices usable with this template
    std::vector<std::string> pool;      // distinct global values of the target field
};

std::vector<TemplateContext> usable_templates(const EntityStore& store,
                                              const std::vector<QaTemplate>& templates,
                                              std::size_t min_pool,
                                              std::vector<std::string>& warnings) {
    std::vector<TemplateContext> out;
    for (const auto& tpl : templates) {
        if (tpl.target_field.empty())
            throw ValidationError("template '" + tpl.id + "': empty target_field");
        TemplateContext ctx;
        ctx.tpl = &tpl;
        ctx.pool = store.field_values(tpl.target_field, tpl.entity_type);
        if (ctx.pool.size() < min_pool) {
            warnings.push_back("template '" + tpl.id + "': field '" + tpl.target_field +
                               "' has only " + std::to_string(ctx.pool.size()) +
                               " distinct value(s); skipped");
            continue;
        }
        const auto fields = placeholders(tpl.text);
        for (std::size_t i = 0; i < store.size(); ++i) {
            const EntityRecord& e = store.records()[i];
            if (!type_matches(e, tpl.entity_type)) continue;
            bool ok = e.has(tpl.target_field);
            for (const auto& f : fields) ok = ok && e.has(f);
            if (ok) ctx.entities.push_back(i);
        }
        if (ctx.entities.empty()) {
            warnings.push_back("template '" + tpl.id + "': no entity carries all its fields; skipped");
            continue;
        }
        out.push_back(std::move(ctx));
    }
    return out;
}

std::map<std::string, std::string> base_fill(const EntityRecord& e, const std::string& text) {
    std::map<std::string, std::string> fill;
    for (const auto& f : placeholders(text))
        if (e.has(f)) fill[f] = e.values(f).front();
    return fill;
}

} // namespace

bool EntityRecord::has(const std::string& field) const {
    auto it = attributes.find(field);
    return it != attributes.end() && !it->second.empty();
}

const std::vector<std::string>& EntityRecord::values(const std::string& field) const {
    auto it = attributes.find(field);
    if (it == attributes.end() || it->second.empty())
        throw ReferenceError("entity '" + entity_id + "' has no field '" + field + "'");
    return it->second;
}

void EntityStore::add(EntityRecord rec, const std::string& where) {
    const std::string at = where.empty() ? ("entity '" + rec.entity_id + "'") : where;
    if (rec.entity_id.empty()) throw ValidationError(at + ": empty entity_id");
    if (index_.count(rec.entity_id))
        throw ValidationError(at + ": duplicate entity_id '" + rec.entity_id + "'");
    for (const auto& [field, vals] : rec.attributes) {
        if (field.empty()) throw ValidationError(at + ": empty attribute name");
        for (const auto& v : vals)
            if (v.empty()) throw ValidationError(at + ": empty value for field '" + field + "'");
    }
    index_.emplace(rec.entity_id, records_.size());
    records_.push_back(std::move(rec));
}

EntityStore EntityStore::from_jsonl(const std::filesystem::path& path) {
    EntityStore store;
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        const std::string where = path.filename().string() + " line " + std::to_string(lineno);
        if (!j.contains("entity_id") || !j.contains("entity_type") || !j.contains("attributes"))
            throw ValidationError(where + ": entity needs entity_id, entity_type and attributes");
        EntityRecord rec;
        rec.entity_id = j.at("entity_id").get<std::string>();
        rec.entity_type = j.at("entity_type").get<std::string>();
        for (const auto& [field, value] : j.at("attributes").items()) {
            if (value.is_string()) {
                rec.attributes[field] = {value.get<std::string>()};
            } else if (value.is_array()) {
                rec.attributes[field] = value.get<std::vector<std::string>>();
            } else {
                throw ValidationError(where + ": field '" + field +
                                      "' must be a string or a string array");
            }
        }
        store.add(std::move(rec), where);
    });
    return store;
}

const EntityRecord& EntityStore::by_id(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ReferenceError("unknown entity_id '" + id + "'");
    return records_[it->second];
}

std::vector<std::string> EntityStore::field_values(const std::string& field,
                                                   const std::string& entity_type) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& rec : records_) {
        if (!type_matches(rec, entity_type) || !rec.has(field)) continue;
        for (const auto& v : rec.values(field))
            if (seen.insert(v).second) out.push_back(v);
    }
    return out;
}

TemplateSet TemplateSet::from_json_file(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(j, path.filename().string());
}

TemplateSet TemplateSet::from_json(const Json& j, const std::string& where) {
    TemplateSet set;
    auto read_tpl = [&](const Json& t, std::size_t i, const char* kind) {
        QaTemplate tpl;
        tpl.id = t.value("id", std::string(kind) + std::to_string(i));
        tpl.entity_type = t.value("entity_type", std::string());
        if (!t.contains("text") || !t.contains("target_field"))
            throw ValidationError(where + ": template '" + tpl.id +
                                  "' needs text and target_field");
        tpl.text = t.at("text").get<std::string>();
        tpl.target_field = t.at("target_field").get<std::string>();
        return tpl;
    };
    if (j.contains("binary"))
        for (std::size_t i = 0; i < j.at("binary").size(); ++i)
            set.binary.push_back(read_tpl(j.at("binary")[i], i, "bin"));
    if (j.contains("mcq"))
        for (std::size_t i = 0; i < j.at("mcq").size(); ++i)
            set.mcq.push_back(read_tpl(j.at("mcq")[i], i, "mcq"));
    if (j.contains("maq")) {
        for (std::size_t i = 0; i < j.at("maq").size(); ++i) {
            const Json& t = j.at("maq")[i];
            MaqPattern p;
            p.id = t.value("id", "maq" + std::to_string(i));
            p.entity_type = t.value("entity_type", std::string());
            if (!t.contains("text") || !t.contains("condition_fields") || !t.contains("answer_field"))
                throw ValidationError(where + ": pattern '" + p.id +
                                      "' needs text, condition_fields and answer_field");
            p.text = t.at("text").get<std::string>();
            p.condition_fields = t.at("condition_fields").get<std::vector<std::string>>();
            p.answer_field = t.at("answer_field").get<std::string>();
            if (p.condition_fields.empty())
                throw ValidationError(where + ": pattern '" + p.id + "' has no condition fields");
            set.maq.push_back(std::move(p));
        }
    }
    return set;
}

GenResult gen_binary(const EntityStore& store, const std::vector<QaTemplate>& templates,
                     std::size_t count, std::uint64_t seed) {
    if (store.empty()) throw ValidationError("gen_binary: empty entity store");
    if (count == 0) throw ValidationError("gen_binary: count must be >= 1");

    GenResult out;
    const auto ctxs = usable_templates(store, templates, 1, out.warnings);
    if (ctxs.empty()) return out;

    // Negatives need a second value in the target field's pool; a template
    // over a single-valued field can still produce positives.
    std::vector<const TemplateContext*> neg_ctxs;
    for (const auto& ctx : ctxs) {
        if (ctx.pool.size() >= 2) {
            neg_ctxs.push_back(&ctx);
        } else {
            out.warnings.push_back("template '" + ctx.tpl->id + "': field '" +
                                   ctx.tpl->target_field +
                                   "' has a single global value; no negatives from it");
        }
    }

    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const bool positive = (i % 2 == 0);
        if (!positive && neg_ctxs.empty()) {
            out.warnings.push_back("binary item " + std::to_string(i) +
                                   ": no template can produce a negative; skipped");
            continue;
        }
        bool emitted = false;
        for (int attempt = 0; attempt < 64 && !emitted; ++attempt) {
            const TemplateContext& ctx =
                positive ? ctxs[rng.below(ctxs.size())]
                         : *neg_ctxs[rng.below(neg_ctxs.size())];
            const EntityRecord& e = store.records()[ctx.entities[rng.below(ctx.entities.size())]];
            const auto& own = e.values(ctx.tpl->target_field);

            std::string target_value;
            if (positive) {
                target_value = own[rng.below(own.size())];
            } else {
                std::vector<std::string> pool;
                for (const auto& v : ctx.pool)
                    if (std::find(own.begin(), own.end(), v) == own.end()) pool.push_back(v);
                if (pool.empty()) continue; // this entity owns the whole pool; redraw
                target_value = pool[rng.below(pool.size())];
            }

            auto fill = base_fill(e, ctx.tpl->text);
            fill[ctx.tpl->target_field] = target_value;
            QAItem item;
            item.qid = "bin-" + ctx.tpl->id + "-" + std::to_string(i);
            item.format = QaFormat::Binary;
            item.level = CogLevel::KM;
            item.question = render(ctx.tpl->text, fill, "template '" + ctx.tpl->id + "'");
            item.gold = {positive ? "yes" : "no"};
            item.provenance = Provenance::Template;
            item.source_ids = {e.entity_id};
            validate_item(item);
            out.items.push_back(std::move(item));
            emitted = true;
        }
        if (!emitted)
            out.warnings.push_back("binary item " + std::to_string(i) +
                                   ": no distractor found after 64 draws; skipped");
    }
    return out;
}

GenResult gen_mcq(const EntityStore& store, const std::vector<QaTemplate>& templates,
                  std::size_t count, std::uint64_t seed) {
    if (store.empty()) throw ValidationError("gen_mcq: empty entity store");
    if (count == 0) throw ValidationError("gen_mcq: count must be >= 1");

    GenResult out;
    const auto ctxs = usable_templates(store, templates, 4, out.warnings);
    if (ctxs.empty()) return out;

    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        bool emitted = false;
        for (int attempt = 0; attempt < 64 && !emitted; ++attempt) {
            const TemplateContext& ctx = ctxs[rng.below(ctxs.size())];
            const EntityRecord& e = store.records()[ctx.entities[rng.below(ctx.entities.size())]];
            const auto& own = e.values(ctx.tpl->target_field);
            const std::string gold = own[rng.below(own.size())];

            std::vector<std::string> pool;
            for (const auto& v : ctx.pool)
                if (std::find(own.begin(), own.end(), v) == own.end()) pool.push_back(v);
            if (pool.size() < 3) continue;

            QAItem item;
            item.qid = "mcq-" + ctx.tpl->id + "-" + std::to_string(i);
            item.format = QaFormat::MCQ;
            item.level = CogLevel::KU;
            item.question = render(ctx.tpl->text, base_fill(e, ctx.tpl->text),
                                   "template '" + ctx.tpl->id + "'");
            item.candidates = sample_without_replacement(pool, 3, rng);
            item.candidates.push_back(gold);
            rng.shuffle(item.candidates);
            item.gold = {gold};
            item.provenance = Provenance::Template;
            item.source_ids = {e.entity_id};
            validate_item(item);
            out.items.push_back(std::move(item));
            emitted = true;
        }
        if (!emitted)
            out.warnings.push_back("mcq item " + std::to_string(i) +
                                   ": no viable distractor pool after 64 draws; skipped");
    }
    return out;
}

std::vector<std::string> match_conjunction(
    const EntityStore& store,
    const std::vector<std::pair<std::string, std::string>>& conditions,
    const std::string& entity_type) {
    std::vector<std::string> out;
    for (const auto& e : store.records()) {
        if (!type_matches(e, entity_type)) continue;
        bool ok = true;
        for (const auto& [field, value] : conditions) {
            if (!e.has(field)) { ok = false; break; }
            const auto& vals = e.values(field);
            if (std::find(vals.begin(), vals.end(), value) == vals.end()) { ok = false; break; }
        }
        if (ok) out.push_back(e.entity_id);
    }
    return out;
}

GenResult gen_maq(const EntityStore& store, const MaqPattern& pattern,
                  std::size_t count, std::uint64_t seed) {
    if (store.empty()) throw ValidationError("gen_maq: empty entity store");
    if (count == 0) throw ValidationError("gen_maq: count must be >= 1");
    if (pattern.condition_fields.empty() || pattern.answer_field.empty())
        throw ValidationError("gen_maq: pattern '" + pattern.id +
                              "' needs condition fields and an answer field");

    GenResult out;

    // Enumerate the condition-value combinations realized by the store,
    // first-appearance order, then visit them in seeded order.
    std::vector<std::vector<std::string>> combos;
    std::set<std::vector<std::string>> seen;
    for (const auto& e : store.records()) {
        if (!type_matches(e, pattern.entity_type) || !e.has(pattern.answer_field)) continue;
        bool ok = true;
        for (const auto& f : pattern.condition_fields) ok = ok && e.has(f);
        if (!ok) continue;
        std::vector<std::vector<std::string>> partial{{}};
        for (const auto& f : pattern.condition_fields) {
            std::vector<std::vector<std::string>> next;
            for (const auto& base : partial)
                for (const auto& v : e.values(f)) {
                    auto row = base;
                    row.push_back(v);
                    next.push_back(std::move(row));
                }
            partial = std::move(next);
        }
        for (auto& combo : partial)
            if (seen.insert(combo).second) combos.push_back(std::move(combo));
    }

    Rng rng(seed);
    rng.shuffle(combos);

    for (const auto& combo : combos) {
        if (out.items.size() >= count) break;

        std::vector<std::pair<std::string, std::string>> conditions;
        std::string combo_label;
        for (std::size_t i = 0; i < combo.size(); ++i) {
            conditions.emplace_back(pattern.condition_fields[i], combo[i]);
            combo_label += (i ? "," : "") + pattern.condition_fields[i] + "=" + combo[i];
        }

        const std::vector<std::string> gold_ids =
            match_conjunction(store, conditions, pattern.entity_type);
        if (gold_ids.empty()) {
            out.warnings.push_back("pattern '" + pattern.id + "' [" + combo_label +
                                   "]: no matching entity; skipped");
            continue;
        }
        if (gold_ids.size() > 8) {
            out.warnings.push_back("pattern '" + pattern.id + "' [" + combo_label + "]: " +
                                   std::to_string(gold_ids.size()) +
                                   " matches exceed the 8-candidate format; skipped");
            continue;
        }

        std::vector<std::string> gold_texts;
        std::set<std::string> gold_set;
        bool ambiguous = false;
        for (const auto& id : gold_ids) {
            const EntityRecord& e = store.by_id(id);
            if (!e.has(pattern.answer_field)) { ambiguous = true; break; }
            const std::string& text = e.values(pattern.answer_field).front();
            if (!gold_set.insert(text).second) { ambiguous = true; break; }
            gold_texts.push_back(text);
        }
        if (ambiguous) {
            out.warnings.push_back("pattern '" + pattern.id + "' [" + combo_label +
                                   "]: answer texts collide or are missing; skipped");
            continue;
        }

        std::vector<std::string> distractor_pool;
        std::set<std::string> pool_seen = gold_set;
        const std::set<std::string> gold_id_set(gold_ids.begin(), gold_ids.end());
        for (const auto& e : store.records()) {
            if (!type_matches(e, pattern.entity_type) || !e.has(pattern.answer_field)) continue;
            if (gold_id_set.count(e.entity_id)) continue;
            const std::string& text = e.values(pattern.answer_field).front();
            if (pool_seen.insert(text).second) distractor_pool.push_back(text);
        }
        const std::size_t need = 8 - gold_texts.size();
        if (distractor_pool.size() < need) {
            out.warnings.push_back("pattern '" + pattern.id + "' [" + combo_label +
                                   "]: only " + std::to_string(distractor_pool.size()) +
                                   " distractors available for " + std::to_string(need) +
                                   " slots; skipped");
            continue;
        }

        QAItem item;
        item.qid = "maq-" + pattern.id + "-" + std::to_string(out.items.size());
        item.format = QaFormat::MAQ;
        item.level = conditions.size() == 1 ? CogLevel::KU : CogLevel::KA;
        std::map<std::string, std::string> fill;
        for (const auto& [field, value] : conditions) fill[field] = value;
        item.question = render(pattern.text, fill, "pattern '" + pattern.id + "'");
        item.candidates = gold_texts;
        for (auto& d : sample_without_replacement(distractor_pool, need, rng))
            item.candidates.push_back(std::move(d));
        rng.shuffle(item.candidates);
        item.gold = gold_texts;
        item.provenance = Provenance::Relational;
        item.source_ids = gold_ids;
        validate_item(item);
        out.items.push_back(std::move(item));
    }
    return out;
}

GenResult gen_open_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                              const std::string& source_tag) {
    Provenance prov;
    if (source_tag == "faq") {
        prov = Provenance::Faq;
    } else if (source_tag == "forum") {
        prov = Provenance::Forum;
    } else {
        throw ValidationError("gen_open_from_pairs: source_tag must be faq or forum, got '" +
                              source_tag + "'");
    }

    GenResult out;
    std::set<std::string> seen;
    std::size_t n = 0;
    for (const auto& [q_raw, a_raw] : pairs) {
        const std::string q = normalize_ws(q_raw);
        const std::string a = trim(a_raw);
        if (q.empty() || a.empty()) {
            out.warnings.push_back("pair " + std::to_string(n) +
                                   ": empty question or answer; skipped");
            ++n;
            continue;
        }
        ++n;
        if (!seen.insert(q).second) continue; // exact duplicate after normalization

        QAItem item;
        item.qid = "open-" + source_tag + "-" + std::to_string(out.items.size());
        item.format = QaFormat::Open;
        item.level = CogLevel::KC;
        item.question = q;
        item.gold = {a};
        item.provenance = prov;
        validate_item(item);
        out.items.push_back(std::move(item));
    }
    return out;
}

} // namespace semcov
