#include "solfix/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace solfix {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string normalize_ws(const std::string& text) {
    std::string out;
    bool pending = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending = !out.empty();
        } else {
            if (pending) out += ' ';
            pending = false;
            out += c;
        }
    }
    return out;
}

struct Tag {
    std::string name; // lowercase, no slash
    bool closing = false;
    size_t begin = 0; // offset of '<'
    size_t end = 0;   // offset just past '>'
};

std::optional<Tag> next_tag(const std::string& html, size_t from) {
    size_t open = html.find('<', from);
    if (open == std::string::npos) return std::nullopt;
    size_t close = html.find('>', open);
    if (close == std::string::npos) return std::nullopt;
    Tag t;
    t.begin = open;
    t.end = close + 1;
    size_t p = open + 1;
    if (p < close && html[p] == '/') {
        t.closing = true;
        ++p;
    }
    size_t q = p;
    while (q < close && (std::isalnum(static_cast<unsigned char>(html[q])) ||
                         html[q] == '!' || html[q] == '-'))
        ++q;
    t.name = lower(html.substr(p, q - p));
    return t;
}

// Inner content of every <section> element, concatenated in document order.
std::string section_content(const std::string& html) {
    std::string out;
    size_t pos = 0;
    bool found = false;
    while (true) {
        auto tag = next_tag(html, pos);
        if (!tag) break;
        if (!tag->closing && tag->name == "section") {
            // matching close, honoring nesting
            int depth = 1;
            size_t scan = tag->end;
            size_t inner_end = html.size();
            while (depth > 0) {
                auto t2 = next_tag(html, scan);
                if (!t2) { inner_end = html.size(); break; }
                if (t2->name == "section") depth += t2->closing ? -1 : 1;
                if (depth == 0) { inner_end = t2->begin; scan = t2->end; break; }
                scan = t2->end;
            }
            out += html.substr(tag->end, inner_end - tag->end);
            found = true;
            pos = scan;
        } else {
            pos = tag->end;
        }
    }
    if (!found) throw MalformedHtml("document has no <section> content");
    return out;
}

std::string drop_headers(const std::string& html) {
    std::string out;
    size_t pos = 0;
    while (pos < html.size()) {
        auto tag = next_tag(html, pos);
        if (!tag) {
            out += html.substr(pos);
            break;
        }
        out += html.substr(pos, tag->begin - pos);
        const bool is_header = tag->name.size() == 2 && tag->name[0] == 'h' &&
                               std::isdigit(static_cast<unsigned char>(tag->name[1]));
        if (!tag->closing && is_header) {
            // skip to matching close tag
            size_t scan = tag->end;
            while (true) {
                auto t2 = next_tag(html, scan);
                if (!t2) { scan = html.size(); break; }
                scan = t2->end;
                if (t2->closing && t2->name == tag->name) break;
            }
            pos = scan;
        } else {
            out += html.substr(tag->begin, tag->end - tag->begin);
            pos = tag->end;
        }
    }
    return out;
}

std::string decode_entity(const std::string& ent) {
    if (ent == "lt") return "<";
    if (ent == "gt") return ">";
    if (ent == "amp") return "&";
    if (ent == "quot") return "\"";
    if (ent == "apos" || ent == "#39") return "'";
    if (ent == "nbsp") return " ";
    return "&" + ent + ";";
}

// Strips all markup except <code>, collapsing whitespace outside code runs
// and recording each code run as a byte range over the output.
void flatten_paragraph(const std::string& html, std::string& text,
                       std::vector<CodeSpan>& spans) {
    bool in_code = false;
    bool pending_ws = false;
    size_t code_start = 0;
    size_t pos = 0;
    auto emit = [&](char c) {
        if (!in_code && std::isspace(static_cast<unsigned char>(c))) {
            pending_ws = !text.empty();
            return;
        }
        if (pending_ws) {
            text += ' ';
            pending_ws = false;
        }
        text += c;
    };
    while (pos < html.size()) {
        if (html[pos] == '<') {
            auto tag = next_tag(html, pos);
            if (!tag) { emit(html[pos]); ++pos; continue; }
            if (tag->name == "code") {
                if (!tag->closing) {
                    if (pending_ws) { text += ' '; pending_ws = false; }
                    in_code = true;
                    code_start = text.size();
                } else if (in_code) {
                    in_code = false;
                    if (text.size() > code_start)
                        spans.push_back({code_start, text.size()});
                }
            }
            pos = tag->end;
        } else if (html[pos] == '&') {
            size_t semi = html.find(';', pos);
            if (semi != std::string::npos && semi - pos <= 8) {
                for (char c : decode_entity(html.substr(pos + 1, semi - pos - 1)))
                    emit(c);
                pos = semi + 1;
            } else {
                emit(html[pos]);
                ++pos;
            }
        } else {
            emit(html[pos]);
            ++pos;
        }
    }
}

json entry_to_json(const KnowledgeEntry& e) {
    json j;
    j["id"] = e.id;
    j["source_version"] = e.source_version;
    j["target_version"] = e.target_version;
    if (e.category_hint) j["category_hint"] = to_string(*e.category_hint);
    j["text"] = e.text;
    auto spans = json::array();
    for (const auto& s : e.code_spans) spans.push_back({s.start, s.end});
    j["code_spans"] = spans;
    return j;
}

ErrorCategory category_from_string(const std::string& s) {
    if (s == "Parser") return ErrorCategory::Parser;
    if (s == "Declaration") return ErrorCategory::Declaration;
    if (s == "Syntax") return ErrorCategory::Syntax;
    if (s == "Type") return ErrorCategory::Type;
    if (s == "JsonError") return ErrorCategory::JsonError;
    if (s == "IoError") return ErrorCategory::IoError;
    return ErrorCategory::Other;
}

KnowledgeEntry entry_from_json(const json& j) {
    KnowledgeEntry e;
    e.id = j.at("id").get<std::string>();
    e.source_version = j.at("source_version").get<std::string>();
    e.target_version = j.at("target_version").get<std::string>();
    if (j.contains("category_hint"))
        e.category_hint = category_from_string(j["category_hint"].get<std::string>());
    e.text = j.at("text").get<std::string>();
    for (const auto& s : j.at("code_spans"))
        e.code_spans.push_back({s.at(0).get<size_t>(), s.at(1).get<size_t>()});
    return e;
}

} // namespace

std::string entry_id(const std::string& source_version,
                     const std::string& target_version,
                     const std::string& text) {
    const uint64_t h =
        fnv1a64(source_version + "|" + target_version + "|" + normalize_ws(text));
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str().substr(4); // 12 hex chars
}

std::vector<KnowledgeEntry> ingest_html(const std::string& html,
                                        const std::string& source_version,
                                        const std::string& target_version) {
    const std::string body = drop_headers(section_content(html));

    std::vector<KnowledgeEntry> out;
    size_t pos = 0;
    while (true) {
        auto tag = next_tag(body, pos);
        if (!tag) break;
        if (!tag->closing && tag->name == "p") {
            size_t scan = tag->end;
            size_t end = body.size();
            while (true) {
                auto t2 = next_tag(body, scan);
                if (!t2) { scan = body.size(); break; }
                scan = t2->end;
                if (t2->closing && t2->name == "p") { end = t2->begin; break; }
            }
            KnowledgeEntry e;
            e.source_version = source_version;
            e.target_version = target_version;
            flatten_paragraph(body.substr(tag->end, end - tag->end), e.text,
                              e.code_spans);
            // trim trailing space
            while (!e.text.empty() && e.text.back() == ' ') e.text.pop_back();
            if (!e.text.empty()) {
                e.id = entry_id(source_version, target_version, e.text);
                const bool dup = std::any_of(out.begin(), out.end(),
                                             [&](const KnowledgeEntry& x) {
                                                 return x.id == e.id;
                                             });
                if (!dup) out.push_back(std::move(e));
            }
            pos = scan;
        } else {
            pos = tag->end;
        }
    }
    return out;
}

KnowledgeStore curate(const std::vector<KnowledgeEntry>& entries,
                      const std::map<std::string, CurationLabel>& labels) {
    KnowledgeStore store;
    for (const auto& e : entries) {
        auto it = labels.find(e.id);
        if (it == labels.end())
            throw MissingLabel("no curation label for entry " + e.id);
        if (it->second == CurationLabel::ErrorInducing)
            store.entries.push_back(e);
        else
            ++store.curated_dropped;
    }
    return store;
}

void save(const KnowledgeStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path.string());
    json header;
    header["schema_version"] = kSchemaVersion;
    header["curated_dropped"] = store.curated_dropped;
    header["provenance"] = store.provenance;
    out << header.dump() << "\n";
    for (const auto& e : store.entries) out << entry_to_json(e).dump() << "\n";
    if (!out) throw IoFailure("write failed: " + path.string());
}

KnowledgeStore load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoFailure("empty store file: " + path.string());
    KnowledgeStore store;
    try {
        json header = json::parse(line);
        const int version = header.at("schema_version").get<int>();
        if (version != kSchemaVersion)
            throw SchemaMismatch("unsupported schema_version " +
                                 std::to_string(version) + " in " + path.string());
        store.curated_dropped = header.value("curated_dropped", 0);
        if (header.contains("provenance"))
            store.provenance =
                header["provenance"].get<std::map<std::string, std::string>>();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            store.entries.push_back(entry_from_json(json::parse(line)));
        }
    } catch (const json::exception& e) {
        throw IoFailure("corrupt store file " + path.string() + ": " + e.what());
    }
    return store;
}

} // namespace solfix
