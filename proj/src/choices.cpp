#include "bonsai/choices.hpp"

#include <json.hpp>

namespace bonsai {

using nlohmann::json;

std::string choices_to_json(const ChoiceSequence& cs) {
  json arr = json::array();
  for (const Choice& c : cs) {
    switch (c.tag) {
      case Choice::Tag::LeafCoin:
        arr.push_back(json::array({"coin", c.value}));
        break;
      case Choice::Tag::AltChoice:
        arr.push_back(json::array({"alt", c.name, c.value, c.leaf_list}));
        break;
      case Choice::Tag::RepCount:
        arr.push_back(json::array({"rep", c.value}));
        break;
      case Choice::Tag::IdentIndex:
        arr.push_back(json::array({"id", c.name, c.value}));
        break;
    }
  }
  return arr.dump();
}

ChoiceSequence choices_from_json(const std::string& json_text) {
  ChoiceSequence out;
  json arr = json::parse(json_text);
  if (!arr.is_array()) throw std::runtime_error("choice sequence: expected a JSON array");
  for (const json& e : arr) {
    if (!e.is_array() || e.empty() || !e[0].is_string())
      throw std::runtime_error("choice sequence: expected [tag, args...] tuples");
    const std::string tag = e[0].get<std::string>();
    Choice c;
    if (tag == "coin") {
      c.tag = Choice::Tag::LeafCoin;
      c.value = e.at(1).get<int64_t>();
    } else if (tag == "alt") {
      c.tag = Choice::Tag::AltChoice;
      c.name = e.at(1).get<std::string>();
      c.value = e.at(2).get<int64_t>();
      c.leaf_list = e.at(3).get<bool>();
    } else if (tag == "rep") {
      c.tag = Choice::Tag::RepCount;
      c.value = e.at(1).get<int64_t>();
    } else if (tag == "id") {
      c.tag = Choice::Tag::IdentIndex;
      c.name = e.at(1).get<std::string>();
      c.value = e.at(2).get<int64_t>();
    } else {
      throw std::runtime_error("choice sequence: unknown tag '" + tag + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace bonsai
