#include "semcov/qa_items.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "semcov/errors.hpp"

namespace semcov {

const char* format_name(QaFormat f) {
    switch (f) {
        case QaFormat::Binary: return "Binary";
        case QaFormat::MCQ: return "MCQ";
        case QaFormat::MAQ: return "MAQ";
        case QaFormat::Open: return "Open";
    }
    return "Binary";
}

const char* level_name(CogLevel l) {
    switch (l) {
        case CogLevel::KM: return "KM";
        case CogLevel::KU: return "KU";
        case CogLevel::KA: return "KA";
        case CogLevel::KC: return "KC";
    }
    return "KM";
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Template: return "template";
        case Provenance::Relational: return "relational";
        case Provenance::Faq: return "faq";
        case Provenance::Forum: return "forum";
        case Provenance::UserInterest: return "user_interest";
        case Provenance::External: return "external";
    }
    return "template";
}

QaFormat parse_format(const std::string& s) {
    if (s == "Binary") return QaFormat::Binary;
    if (s == "MCQ") return QaFormat::MCQ;
    if (s == "MAQ") return QaFormat::MAQ;
    if (s == "Open") return QaFormat::Open;
    throw ValidationError("unknown question format '" + s + "'");
}

CogLevel parse_level(const std::string& s) {
    if (s == "KM") return CogLevel::KM;
    if (s == "KU") return CogLevel::KU;
    if (s == "KA") return CogLevel::KA;
    if (s == "KC") return CogLevel::KC;
    throw ValidationError("unknown cognitive level '" + s + "'");
}

Provenance parse_provenance(const std::string& s) {
    if (s == "template") return Provenance::Template;
    if (s == "relational") return Provenance::Relational;
    if (s == "faq") return Provenance::Faq;
    if (s == "forum") return Provenance::Forum;
    if (s == "user_interest") return Provenance::UserInterest;
    if (s == "external") return Provenance::External;
    throw ValidationError("unknown provenance tag '" + s + "'");
}

Json QAItem::to_json() const {
    Json j;
    j["qid"] = qid;
    j["format"] = format_name(format);
    j["level"] = level_name(level);
    j["question"] = question;
    j["candidates"] = candidates;
    j["gold"] = gold;
    j["provenance"] = provenance_name(provenance);
    j["source_ids"] = source_ids;
    return j;
}

QAItem QAItem::from_json(const Json& j, const std::string& where) {
    for (const char* key : {"qid", "format", "level", "question", "gold", "provenance"}) {
        if (!j.contains(key))
            throw ValidationError(where + ": question record is missing '" + key + "'");
    }
    QAItem item;
    item.qid = j.at("qid").get<std::string>();
    item.format = parse_format(j.at("format").get<std::string>());
    item.level = parse_level(j.at("level").get<std::string>());
    item.question = j.at("question").get<std::string>();
    if (j.contains("candidates"))
        item.candidates = j.at("candidates").get<std::vector<std::string>>();
    if (j.at("gold").is_string()) {
        item.gold = {j.at("gold").get<std::string>()};
    } else {
        item.gold = j.at("gold").get<std::vector<std::string>>();
    }
    item.provenance = parse_provenance(j.at("provenance").get<std::string>());
    if (j.contains("source_ids"))
        item.source_ids = j.at("source_ids").get<std::vector<std::string>>();
    return item;
}

void validate_item(const QAItem& item, const std::string& where) {
    const std::string at = where.empty() ? ("question '" + item.qid + "'") : where;
    if (item.qid.empty()) throw ValidationError(at + ": empty qid");
    if (item.question.empty()) throw ValidationError(at + ": empty question text");
    for (const auto& g : item.gold)
        if (g.empty()) throw ValidationError(at + ": empty gold answer");

    std::set<std::string> cand_set(item.candidates.begin(), item.candidates.end());
    if (cand_set.size() != item.candidates.size())
        throw ValidationError(at + ": duplicate candidates");
    std::set<std::string> gold_set(item.gold.begin(), item.gold.end());
    if (gold_set.size() != item.gold.size())
        throw ValidationError(at + ": duplicate gold answers");

    switch (item.format) {
        case QaFormat::Binary:
            if (!item.candidates.empty())
                throw ValidationError(at + ": Binary items carry no candidates");
            if (item.gold.size() != 1 || (item.gold[0] != "yes" && item.gold[0] != "no"))
                throw ValidationError(at + ": Binary gold must be exactly one of yes/no");
            if (item.level != CogLevel::KM)
                throw ValidationError(at + ": Binary items are KM level");
            break;
        case QaFormat::MCQ:
            if (item.candidates.size() != 4)
                throw ValidationError(at + ": MCQ needs exactly 4 candidates, got " +
                                      std::to_string(item.candidates.size()));
            if (item.gold.size() != 1)
                throw ValidationError(at + ": MCQ needs exactly 1 gold answer");
            if (!cand_set.count(item.gold[0]))
                throw ValidationError(at + ": MCQ gold is not among the candidates");
            if (item.level != CogLevel::KU)
                throw ValidationError(at + ": MCQ items are KU level");
            break;
        case QaFormat::MAQ:
            if (item.candidates.size() != 8)
                throw ValidationError(at + ": MAQ needs exactly 8 candidates, got " +
                                      std::to_string(item.candidates.size()));
            if (item.gold.empty() || item.gold.size() > 8)
                throw ValidationError(at + ": MAQ needs between 1 and 8 gold answers");
            for (const auto& g : item.gold)
                if (!cand_set.count(g))
                    throw ValidationError(at + ": MAQ gold '" + g + "' is not among the candidates");
            if (item.level != CogLevel::KU && item.level != CogLevel::KA)
                throw ValidationError(at + ": MAQ items are KU or KA level");
            break;
        case QaFormat::Open:
            if (!item.candidates.empty())
                throw ValidationError(at + ": Open items carry no candidates");
            if (item.gold.size() != 1)
                throw ValidationError(at + ": Open items need exactly 1 reference answer");
            if (item.level != CogLevel::KC)
                throw ValidationError(at + ": Open items are KC level");
            break;
    }
}

std::vector<QAItem> read_qa_jsonl(const std::filesystem::path& path) {
    std::vector<QAItem> items;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](std::size_t lineno, const Json& j) {
        const std::string where = path.filename().string() + " line " + std::to_string(lineno);
        QAItem item = QAItem::from_json(j, where);
        validate_item(item, where);
        if (!seen.insert(item.qid).second)
            throw ValidationError(where + ": duplicate qid '" + item.qid + "'");
        items.push_back(std::move(item));
    });
    return items;
}

std::string qa_to_jsonl(const std::vector<QAItem>& items) {
    std::ostringstream out;
    for (const auto& item : items) out << item.to_json().dump() << '\n';
    return out.str();
}

void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAItem>& items) {
    atomic_write(path, qa_to_jsonl(items));
}

} // namespace semcov
