#include "abom/depfile.hpp"

namespace abom {

std::vector<std::string> parse_make_deps(std::string_view text) {
    std::vector<std::string> deps;
    std::string word;
    bool in_prerequisites = false;

    auto end_word = [&] {
        if (word.empty()) {
            return;
        }
        if (in_prerequisites) {
            deps.push_back(word);
        } else if (word.back() == ':') {
            in_prerequisites = true;
        }
        word.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\\' && i + 1 < text.size()) {
            const char next = text[i + 1];
            if (next == '\n') {
                end_word();
                ++i;
                continue;
            }
            if (next == '\r' && i + 2 < text.size() && text[i + 2] == '\n') {
                end_word();
                i += 2;
                continue;
            }
            if (next == ' ' || next == '#' || next == '\t') {
                word += next;
                ++i;
                continue;
            }
            word += c;
            continue;
        }
        if (c == '$' && i + 1 < text.size() && text[i + 1] == '$') {
            word += '$';
            ++i;
            continue;
        }
        if (c == '\n') {
            end_word();
            in_prerequisites = false;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            end_word();
            continue;
        }
        if (c == ':' && !in_prerequisites) {
            // "C:/x" style drive prefixes stay part of the target name.
            const bool drive = word.size() == 1 && i + 1 < text.size() &&
                               (text[i + 1] == '/' || text[i + 1] == '\\');
            if (!drive) {
                word += ':';
                end_word();
                in_prerequisites = true;
                continue;
            }
        }
        word += c;
    }
    end_word();
    return deps;
}

}  // namespace abom
