#pragma once

#include "sgr/errors.hpp"
#include "sgr/query.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// Closed attribute-word table: surface word -> (key, canonical value).
/// Open-vocabulary attributes (e.g. actions) are written key=value instead.
inline const std::map<std::string, AttributeConstraint>& attribute_vocabulary() {
    static const std::map<std::string, AttributeConstraint> vocab = {
        {"male", {"gender", "male"}},
        {"males", {"gender", "male"}},
        {"female", {"gender", "female"}},
        {"females", {"gender", "female"}},
        {"child", {"age", "child"}},
        {"children", {"age", "child"}},
        {"adolescent", {"age", "adolescent"}},
        {"adolescents", {"age", "adolescent"}},
        {"young", {"age", "young_adult"}},
        {"young_adult", {"age", "young_adult"}},
        {"young_adults", {"age", "young_adult"}},
        {"adult", {"age", "adult"}},
        {"adults", {"age", "adult"}},
        {"elderly", {"age", "elderly"}},
        {"old", {"age", "elderly"}},
        {"senior", {"age", "elderly"}},
        {"seniors", {"age", "elderly"}},
        {"white", {"race", "white"}},
        {"black", {"race", "black"}},
        {"asian", {"race", "asian"}},
        {"other", {"race", "other"}},
    };
    return vocab;
}

namespace detail {

inline const std::set<std::string>& grammar_keywords() {
    static const std::set<std::string> words = {
        "find", "is", "there", "count", "how", "many", "what", "of", "who", "has",
        "positioned", "to", "his", "her", "their", "at", "distance", "relative",
        "robot", "next", "occluded", "by", "person", "people", "man", "woman",
        "men", "women", "front", "left", "right", "back", "close", "medium", "far"};
    return words;
}

struct Token {
    std::string text;
    std::size_t offset = 0;
};

/// Lowercased word and '=' tokens with byte offsets; articles are dropped,
/// punctuation is skipped.
inline std::vector<Token> tokenize_query(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == '=') {
            tokens.push_back({"=", i});
            ++i;
            continue;
        }
        if (!std::isalnum(c) && c != '_') {
            ++i;
            continue;
        }
        std::size_t start = i;
        std::string word;
        while (i < text.size()) {
            unsigned char d = static_cast<unsigned char>(text[i]);
            if (!std::isalnum(d) && d != '_') break;
            word.push_back(static_cast<char>(std::tolower(d)));
            ++i;
        }
        if (word == "a" || word == "an" || word == "the") continue;
        tokens.push_back({std::move(word), start});
    }
    return tokens;
}

class QueryParser {
public:
    QueryParser(std::vector<Token> tokens, std::size_t text_size, bool strict)
        : tokens_(std::move(tokens)), end_offset_(text_size), strict_(strict) {}

    StructuredQuery parse() {
        StructuredQuery q;
        const std::string& head = peek_text();
        if (head == "find") {
            next();
            q.task = Task::vg;
        } else if (head == "is") {
            next();
            expect("there");
            q.task = Task::vqa_exists;
        } else if (head == "count") {
            next();
            q.task = Task::vqa_count;
        } else if (head == "how") {
            next();
            expect("many");
            q.task = Task::vqa_count;
        } else if (head == "what") {
            next();
            expect("is");
            q.task = Task::vqa_attribute;
            if (at_end()) fail("expected an attribute key");
            q.vqa_attribute_key = canonical_token(next().text);
            expect("of");
        } else {
            fail("expected find / is there / count / how many / what is");
        }
        q.anchor_attrs = parse_noun_phrase();
        while (!at_end()) {
            std::size_t before = pos_;
            if (auto rel = try_parse_relation()) {
                q.relations.push_back(std::move(*rel));
                continue;
            }
            if (pos_ == before && !strict_ && !at_end()) {
                next();   // lenient mode: skip stray words
                continue;
            }
            unknown_or_syntax("expected a relation clause");
        }
        q.canonicalize();
        return q;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t end_offset_ = 0;
    bool strict_ = true;

    bool at_end() const { return pos_ >= tokens_.size(); }
    const std::string& peek_text(std::size_t ahead = 0) const {
        static const std::string empty;
        return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead].text : empty;
    }
    std::size_t offset() const { return at_end() ? end_offset_ : tokens_[pos_].offset; }
    const Token& next() { return tokens_[pos_++]; }

    [[noreturn]] void fail(const std::string& why) const { throw SyntaxError(offset(), why); }

    /// Unknown non-keyword tokens are vocabulary errors; anything else is a
    /// structural error.
    [[noreturn]] void unknown_or_syntax(const std::string& why) const {
        if (!at_end() && !grammar_keywords().count(peek_text()) &&
            !attribute_vocabulary().count(peek_text()) && peek_text() != "=")
            throw UnknownAttributeWord(offset(), peek_text());
        fail(why);
    }

    void expect(const char* word) {
        if (at_end() || peek_text() != word) fail(std::string("expected \"") + word + "\"");
        next();
    }

    bool accept(const char* word) {
        if (!at_end() && peek_text() == word) {
            next();
            return true;
        }
        return false;
    }

    /// np := ATTRWORD* (head | KEYVAL+); headless attribute lists are allowed
    /// ("a female"). man/woman heads contribute a gender constraint.
    std::vector<AttributeConstraint> parse_noun_phrase() {
        std::vector<AttributeConstraint> attrs;
        bool any = false;
        while (!at_end()) {
            const std::string& w = peek_text();
            if (w == "person" || w == "people") {
                next();
                any = true;
                break;
            }
            if (w == "man" || w == "men") {
                next();
                attrs.push_back({"gender", "male"});
                any = true;
                break;
            }
            if (w == "woman" || w == "women") {
                next();
                attrs.push_back({"gender", "female"});
                any = true;
                break;
            }
            if (peek_text(1) == "=") {
                std::string key = next().text;
                next();   // '='
                if (at_end()) fail("expected a value after '='");
                attrs.push_back({canonical_token(key), canonical_token(next().text)});
                any = true;
                continue;
            }
            auto it = attribute_vocabulary().find(w);
            if (it != attribute_vocabulary().end()) {
                next();
                attrs.push_back(it->second);
                any = true;
                continue;
            }
            if (!any && !strict_ && !grammar_keywords().count(w)) {
                next();   // lenient mode: treat the unknown word as noise
                continue;
            }
            break;
        }
        if (!any) unknown_or_syntax("expected a person description");
        return attrs;
    }

    std::optional<Sector> try_parse_sector() {
        const std::string& w = peek_text();
        std::string name;
        if (w == "front" || w == "back") {
            const std::string& follow = peek_text(1);
            name = (follow == "left" || follow == "right") ? w + "_" + follow : w;
            next();
            if (name.size() > w.size()) next();
        } else if (w == "left" || w == "right") {
            name = w;
            next();
        } else if (sector_from_string(w)) {
            name = w;   // underscore forms like front_left
            next();
        } else {
            return std::nullopt;
        }
        return sector_from_string(name);
    }

    /// "at a" BIN "distance" (articles already dropped).
    std::optional<DistanceBin> try_parse_bin_clause() {
        if (peek_text() != "at") return std::nullopt;
        auto bin = bin_from_string(peek_text(1));
        if (!bin) return std::nullopt;
        next();
        next();
        expect("distance");
        return bin;
    }

    std::optional<RelationalConstraint> try_parse_relation() {
        if (accept("who")) {
            expect("has");
            RelationalConstraint r;
            r.frame = Frame::person;
            r.related_attrs = parse_noun_phrase();
            expect("positioned");
            if (auto bin = try_parse_bin_clause()) {
                r.distance_bin = bin;
                return r;
            }
            expect("to");
            if (!(accept("his") || accept("her") || accept("their")))
                fail("expected his, her, or their");
            r.direction = try_parse_sector();
            if (!r.direction) fail("expected a direction sector");
            r.distance_bin = try_parse_bin_clause();
            return r;
        }
        if (accept("next")) {
            expect("to");
            RelationalConstraint r;
            r.frame = Frame::person;
            r.adjacency = true;
            r.related_attrs = parse_noun_phrase();
            return r;
        }
        if (accept("occluded")) {
            expect("by");
            RelationalConstraint r;
            r.frame = Frame::person;
            r.occlusion = true;
            r.inverse = true;
            r.related_attrs = parse_noun_phrase();
            return r;
        }
        if (peek_text() == "positioned" || peek_text() == "to" || peek_text() == "at") {
            bool had_positioned = accept("positioned");
            RelationalConstraint r;
            r.distance_bin = try_parse_bin_clause();
            if (accept("to")) {
                r.direction = try_parse_sector();
                if (!r.direction) fail("expected a direction sector");
                if (accept("of")) {
                    // "to the SECTOR of <np>": anchor lies in the related
                    // person's sector
                    r.frame = Frame::person;
                    r.inverse = true;
                    r.related_attrs = parse_noun_phrase();
                    if (!r.distance_bin) r.distance_bin = try_parse_bin_clause();
                    return r;
                }
            }
            if (!had_positioned) fail("expected \"positioned\"");
            expect("relative");
            expect("to");
            expect("robot");
            if (!r.direction && !r.distance_bin)
                fail("robot-relative clause needs a direction or distance");
            r.frame = Frame::robot;
            return r;
        }
        return std::nullopt;
    }
};

} // namespace detail

/// Parse a controlled-grammar query sentence. Unknown attribute words are an
/// error in strict mode and skipped otherwise.
inline StructuredQuery parse_query(const std::string& text, bool strict = true) {
    auto tokens = detail::tokenize_query(text);
    if (tokens.empty()) throw SyntaxError(0, "empty query");
    return detail::QueryParser(std::move(tokens), text.size(), strict).parse();
}

// ---------------------------------------------------------------------------
// Canonical rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string article_for(const std::string& word) {
    return (!word.empty() && std::string("aeiou").find(word[0]) != std::string::npos) ? "an" : "a";
}

/// Canonical surface word for one attribute constraint: the value itself when
/// the vocabulary maps it back, otherwise key=value.
inline std::string attr_word(const AttributeConstraint& a) {
    auto it = attribute_vocabulary().find(a.value);
    if (it != attribute_vocabulary().end() && it->second == a) return a.value;
    return a.key + "=" + a.value;
}

inline std::string render_np(const std::vector<AttributeConstraint>& attrs, bool with_article,
                             bool plural = false) {
    std::string words;
    for (const auto& a : attrs) {
        if (!words.empty()) words += ' ';
        words += attr_word(a);
    }
    // gender-only phrases read fine headless ("a female", "the females");
    // everything else gets the person/people head
    bool headless = attrs.size() == 1 && attrs[0].key == "gender" &&
                    attribute_vocabulary().count(attrs[0].value);
    std::string np;
    if (words.empty()) np = plural ? "people" : "person";
    else if (headless) np = plural ? words + "s" : words;
    else np = words + (plural ? " people" : " person");
    return with_article ? article_for(np) + " " + np : np;
}

inline std::string render_sector(Sector s) {
    std::string name = to_string(s);
    for (char& c : name)
        if (c == '_') c = ' ';
    return name;
}

inline std::string render_bin_clause(DistanceBin b) {
    return std::string(" at a ") + to_string(b) + " distance";
}

} // namespace detail

/// Deterministic canonical sentence; parse_query(render_query(q)) == q for
/// every valid query.
inline std::string render_query(const StructuredQuery& q) {
    std::string out;
    switch (q.task) {
        case Task::vg: out = "find " + detail::render_np(q.anchor_attrs, true); break;
        case Task::vqa_exists: out = "is there " + detail::render_np(q.anchor_attrs, true); break;
        case Task::vqa_count:
            out = "count the " + detail::render_np(q.anchor_attrs, false, true);
            break;
        case Task::vqa_attribute:
            out = "what is the " + *q.vqa_attribute_key + " of the " +
                  detail::render_np(q.anchor_attrs, false);
            break;
    }
    std::string pron = "their";
    for (const auto& a : q.anchor_attrs) {
        if (a.key == "gender" && a.value == "male") pron = "his";
        if (a.key == "gender" && a.value == "female") pron = "her";
    }
    for (const auto& r : q.relations) {
        if (r.frame == Frame::robot) {
            out += " positioned";
            if (r.distance_bin) out += detail::render_bin_clause(*r.distance_bin);
            if (r.direction) out += " to the " + detail::render_sector(*r.direction);
            out += " relative to the robot";
        } else if (r.occlusion) {
            out += " occluded by " + detail::render_np(r.related_attrs, true);
        } else if (r.adjacency) {
            out += " next to " + detail::render_np(r.related_attrs, true);
        } else if (r.inverse) {
            out += " positioned to the " + detail::render_sector(*r.direction) + " of " +
                   detail::render_np(r.related_attrs, true);
            if (r.distance_bin) out += detail::render_bin_clause(*r.distance_bin);
        } else if (r.direction) {
            out += " who has " + detail::render_np(r.related_attrs, true) + " positioned to " +
                   pron + " " + detail::render_sector(*r.direction);
            if (r.distance_bin) out += detail::render_bin_clause(*r.distance_bin);
        } else {
            out += " who has " + detail::render_np(r.related_attrs, true) + " positioned" +
                   detail::render_bin_clause(*r.distance_bin);
        }
    }
    return out;
}

} // namespace sgr
