#include "words.hpp"

#include <sstream>
#include <vector>

namespace text {

std::string reverse_words(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;)
        words.push_back(w);
    std::string out;
    for (std::size_t i = words.size(); i > 0; --i) {
        out += words[i - 1];
        out += ' ';
    }
    return out;
}

}  // namespace text
