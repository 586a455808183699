#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semcov/jsonl_io.hpp"

namespace semcov {

enum class QaFormat { Binary, MCQ, MAQ, Open };
enum class CogLevel { KM, KU, KA, KC };
enum class Provenance { Template, Relational, Faq, Forum, UserInterest, External };

const char* format_name(QaFormat f);
const char* level_name(CogLevel l);
const char* provenance_name(Provenance p);
QaFormat parse_format(const std::string& s);
CogLevel parse_level(const std::string& s);
Provenance parse_provenance(const std::string& s);

/// One benchmark question. gold holds answer strings: "yes"/"no" for Binary,
/// candidate texts for MCQ/MAQ (never option letters, so items survive
/// candidate reshuffling), the reference answer for Open.
struct QAItem {
    std::string qid;
    QaFormat format = QaFormat::Binary;
    CogLevel level = CogLevel::KM;
    std::string question;
    std::vector<std::string> candidates; // empty for Binary/Open
    std::vector<std::string> gold;
    Provenance provenance = Provenance::Template;
    std::vector<std::string> source_ids;

    bool operator==(const QAItem&) const = default;

    Json to_json() const;
    static QAItem from_json(const Json& j, const std::string& where);
};

/// Format invariants, enforced on everything that enters or leaves the
/// toolkit: per-format candidate counts and gold arities, the format/level
/// pairing (Binary:KM, MCQ:KU, MAQ:KU|KA, Open:KC), candidate uniqueness,
/// golds drawn from candidates, and no empty texts. Throws ValidationError.
void validate_item(const QAItem& item, const std::string& where = {});

std::vector<QAItem> read_qa_jsonl(const std::filesystem::path& path);
std::string qa_to_jsonl(const std::vector<QAItem>& items);
void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAItem>& items);

} // namespace semcov
