#ifndef DISCO_VOCAB_HPP
#define DISCO_VOCAB_HPP

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "disco/dependency.hpp"
#include "disco/error.hpp"

namespace disco {

// Dense string <-> id map. Optionally reserves id 0 (pad) and 1 (unknown).
class Index {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  explicit Index(bool reserved = true) : reserved_(reserved) {
    if (reserved_) {
      add("<pad>");
      add("<unk>");
    }
  }

  int add(const std::string& item) {
    auto [it, inserted] = ids_.emplace(item, static_cast<int>(items_.size()));
    if (inserted) items_.push_back(item);
    return it->second;
  }

  // Unknown items map to kUnknown, or -1 without reserved ids.
  int lookup(const std::string& item) const {
    auto it = ids_.find(item);
    if (it != ids_.end()) return it->second;
    return reserved_ ? kUnknown : -1;
  }

  bool contains(const std::string& item) const { return ids_.count(item) != 0; }
  const std::string& item(int id) const { return items_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return items_.size(); }
  bool reserved() const { return reserved_; }
  const std::vector<std::string>& items() const { return items_; }

  static Index from_items(const std::vector<std::string>& items, bool reserved) {
    Index out(false);
    out.reserved_ = reserved;
    for (const std::string& s : items) {
      if (out.add(s) != static_cast<int>(out.size()) - 1) throw FormatError("vocabulary: duplicate item '" + s + "'");
    }
    if (reserved && (out.size() < 2)) throw FormatError("vocabulary: reserved ids missing");
    return out;
  }

 private:
  bool reserved_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> items_;
};

// ASCII lowercasing; bytes of multi-byte UTF-8 sequences pass through.
inline std::string lowercase(std::string s) {
  for (char& c : s) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

// Splits into UTF-8 code points; malformed lead bytes become single units.
inline std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 1;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

struct Vocabulary {
  Index words;
  Index chars;
  Index pos;
  Index labels{false};  // `root` is id 0, the rest sorted

  int word_id(const std::string& form) const { return words.lookup(lowercase(form)); }
  int label_id(const AugmentedLabel& l) const { return labels.lookup(l.str()); }

  static Vocabulary build(const std::vector<AugmentedDependencyTree>& corpus) {
    Vocabulary v;
    std::set<std::string> labels;
    for (const AugmentedDependencyTree& dep : corpus) {
      for (const Token& t : dep.tokens) {
        v.words.add(lowercase(t.form));
        for (const std::string& c : utf8_chars(t.form)) v.chars.add(c);
        v.pos.add(t.pos);
      }
      for (const AugmentedLabel& l : dep.labels) {
        if (!l.is_root()) labels.insert(l.str());
      }
    }
    v.labels.add(AugmentedLabel::root().str());
    for (const std::string& l : labels) v.labels.add(l);
    return v;
  }
};

}  // namespace disco

#endif  // DISCO_VOCAB_HPP
