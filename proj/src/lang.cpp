#include "xcot/lang.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace xcot {

namespace {

std::vector<LanguageInfo> make_builtin_entries() {
    // Covers the MGSM, XCOPA, XNLI and PAWS-X evaluation languages plus
    // English. Elicitation and label strings are curated fixtures.
    return {
        {"bn", "Bengali", "প্রশ্ন", "উত্তর", "আসুন ধাপে ধাপে চিন্তা করি",
         {"হ্যাঁ"}, {"না"}, {"হয়তো"}, {"ধাপ"}},
        {"de", "German", "Frage", "Antwort", "Denken wir Schritt für Schritt",
         {"Ja"}, {"Nein"}, {"Vielleicht"}, {"Schritt"}},
        {"en", "English", "Question", "Answer", "Let's think step by step",
         {"Yes"}, {"No"}, {"Maybe"}, {"Step"}},
        {"es", "Spanish", "Pregunta", "Respuesta", "Pensemos paso a paso",
         {"Sí", "Si"}, {"No"}, {"Quizás", "Tal vez"}, {"Paso"}},
        {"et", "Estonian", "Küsimus", "Vastus", "Mõtleme samm-sammult",
         {"Jah"}, {"Ei"}, {"Võib-olla"}, {"Samm"}},
        {"fr", "French", "Question", "Réponse", "Réfléchissons étape par étape",
         {"Oui"}, {"Non"}, {"Peut-être"}, {"Étape", "Etape"}},
        {"ht", "Haitian Creole", "Kesyon", "Repons", "Ann reflechi etap pa etap",
         {"Wi"}, {"Non"}, {"Petèt"}, {"Etap"}},
        {"id", "Indonesian", "Pertanyaan", "Jawaban", "Mari berpikir langkah demi langkah",
         {"Ya"}, {"Tidak"}, {"Mungkin"}, {"Langkah"}},
        {"it", "Italian", "Domanda", "Risposta", "Pensiamo passo dopo passo",
         {"Sì", "Si"}, {"No"}, {"Forse"}, {"Passo"}},
        {"ja", "Japanese", "質問", "答え", "一歩一歩考えましょう",
         {"はい"}, {"いいえ"}, {"たぶん", "おそらく"}, {"ステップ"}},
        {"qu", "Quechua", "Tapuy", "Kutichiy", "Sapa thatkipi yuyaykusun",
         {"Arí", "Ari"}, {"Mana"}, {"Ichapas"}, {"Thatki"}},
        {"ru", "Russian", "Вопрос", "Ответ", "Давайте подумаем шаг за шагом",
         {"Да"}, {"Нет"}, {"Возможно", "Может быть"}, {"Шаг"}},
        {"sw", "Swahili", "Swali", "Jibu", "Hebu tufikiri hatua kwa hatua",
         {"Ndiyo", "Ndio"}, {"Hapana"}, {"Labda"}, {"Hatua"}},
        {"ta", "Tamil", "கேள்வி", "பதில்", "படிப்படியாக யோசிப்போம்",
         {"ஆம்", "ஆமாம்"}, {"இல்லை"}, {"ஒருவேளை"}, {"படி"}},
        {"te", "Telugu", "ప్రశ్న", "సమాధానం", "దశలవారీగా ఆలోచిద్దాం",
         {"అవును"}, {"కాదు"}, {"బహుశా"}, {"దశ"}},
        {"th", "Thai", "คำถาม", "คำตอบ", "ลองคิดทีละขั้นตอน",
         {"ใช่"}, {"ไม่ใช่", "ไม่"}, {"อาจจะ"}, {"ขั้นตอนที่", "ขั้นตอน"}},
        {"tr", "Turkish", "Soru", "Cevap", "Adım adım düşünelim",
         {"Evet"}, {"Hayır"}, {"Belki"}, {"Adım"}},
        {"vi", "Vietnamese", "Câu hỏi", "Câu trả lời", "Hãy suy nghĩ từng bước",
         {"Có", "Đúng"}, {"Không"}, {"Có thể"}, {"Bước"}},
        {"zh", "Chinese", "问题", "答案", "让我们一步步思考",
         {"是", "是的"}, {"否", "不是"}, {"也许", "可能"}, {"步骤"}},
    };
}

const std::vector<LanguageInfo>& builtin_entries() {
    static const std::vector<LanguageInfo> entries = make_builtin_entries();
    return entries;
}

std::vector<std::string> to_string_vector(const nlohmann::json& j) {
    std::vector<std::string> out;
    for (const auto& v : j) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

LanguageCode LanguageCode::parse(std::string_view code) {
    if (code.size() != 2 || code[0] < 'a' || code[0] > 'z' || code[1] < 'a' || code[1] > 'z') {
        throw std::invalid_argument("language code must be two lowercase ASCII letters: '" +
                                    std::string(code) + "'");
    }
    if (!is_registered(code)) {
        throw std::invalid_argument("unregistered language code: '" + std::string(code) + "'");
    }
    return LanguageCode(std::string(code));
}

bool LanguageCode::is_registered(std::string_view code) {
    const auto& entries = builtin_entries();
    return std::any_of(entries.begin(), entries.end(),
                       [&](const LanguageInfo& e) { return e.code == code; });
}

const LanguageTable& LanguageTable::builtin() {
    static const LanguageTable table = [] {
        LanguageTable t;
        t.entries_ = builtin_entries();
        return t;
    }();
    return table;
}

LanguageTable LanguageTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open language table: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);

    LanguageTable table;
    for (const auto& row : doc.at("languages")) {
        LanguageInfo info;
        info.code = row.at("code").get<std::string>();
        if (!LanguageCode::is_registered(info.code)) {
            throw std::runtime_error("language table entry for unregistered code: " + info.code);
        }
        info.name = row.at("name").get<std::string>();
        info.question_word = row.at("question_word").get<std::string>();
        info.answer_word = row.at("answer_word").get<std::string>();
        info.cot_elicitation = row.at("cot_elicitation").get<std::string>();
        info.yes_forms = to_string_vector(row.at("yes"));
        info.no_forms = to_string_vector(row.at("no"));
        info.maybe_forms = to_string_vector(row.at("maybe"));
        info.step_words = to_string_vector(row.at("step_words"));
        table.entries_.push_back(std::move(info));
    }
    return table;
}

const LanguageInfo& LanguageTable::info(const LanguageCode& code) const {
    for (const auto& e : entries_) {
        if (e.code == code.str()) return e;
    }
    throw std::out_of_range("language table has no entry for '" + code.str() + "'");
}

std::vector<LanguageCode> registered_languages() {
    std::vector<LanguageCode> out;
    for (const auto& e : builtin_entries()) out.push_back(LanguageCode::parse(e.code));
    return out;
}

}  // namespace xcot
