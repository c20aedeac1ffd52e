#include "attrcons/model.hpp"

#include <algorithm>
#include <unordered_set>

namespace attrcons {

std::size_t AttributeSchema::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw ValidationError("unknown attribute name: " + name);
  }
  return static_cast<std::size_t>(it - names.begin());
}

void AttributeSchema::validate() const {
  if (names.empty()) {
    throw ValidationError("attribute schema must contain at least one attribute");
  }
  if (stable.size() != names.size()) {
    throw ValidationError("attribute schema stable flags do not match name count");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) {
      throw ValidationError("attribute schema contains an empty name");
    }
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate attribute name: " + name);
    }
  }
}

namespace {

struct CelebaAttr {
  const char* name;
  bool stable;
};

constexpr CelebaAttr kCelebaAttrs[] = {
    {"5_o_Clock_Shadow", true},
    {"Arched_Eyebrows", true},
    {"Attractive", false},
    {"Bags_Under_Eyes", true},
    {"Bald", true},
    {"Bangs", true},
    {"Big_Lips", true},
    {"Big_Nose", true},
    {"Black_Hair", true},
    {"Blond_Hair", true},
    {"Blurry", false},
    {"Brown_Hair", true},
    {"Bushy_Eyebrows", true},
    {"Chubby", true},
    {"Double_Chin", true},
    {"Eyeglasses", true},
    {"Goatee", true},
    {"Gray_Hair", true},
    {"Heavy_Makeup", true},
    {"High_Cheekbones", true},
    {"Male", true},
    {"Mouth_Slightly_Open", false},
    {"Mustache", true},
    {"Narrow_Eyes", true},
    {"No_Beard", true},
    {"Oval_Face", true},
    {"Pale_Skin", true},
    {"Pointy_Nose", true},
    {"Receding_Hairline", true},
    {"Rosy_Cheeks", true},
    {"Sideburns", true},
    {"Smiling", false},
    {"Straight_Hair", true},
    {"Wavy_Hair", true},
    {"Wearing_Earrings", true},
    {"Wearing_Hat", true},
    {"Wearing_Lipstick", true},
    {"Wearing_Necklace", true},
    {"Wearing_Necktie", true},
    {"Young", true},
};

}  // namespace

AttributeSchema celeba_schema() {
  AttributeSchema schema;
  schema.names.reserve(std::size(kCelebaAttrs));
  schema.stable.reserve(std::size(kCelebaAttrs));
  for (const auto& attr : kCelebaAttrs) {
    schema.names.emplace_back(attr.name);
    schema.stable.push_back(attr.stable);
  }
  return schema;
}

std::size_t Dataset::total_records() const {
  std::size_t n = 0;
  for (const auto& group : groups) {
    n += group.images.size();
  }
  return n;
}

void Dataset::validate() const {
  schema.validate();
  std::unordered_set<std::string> image_ids;
  for (const auto& group : groups) {
    if (group.images.empty()) {
      throw ValidationError("subject group '" + group.subject_id + "' is empty");
    }
    for (const auto& record : group.images) {
      if (record.subject_id != group.subject_id) {
        throw ValidationError("record '" + record.image_id + "' subject id '" +
                              record.subject_id + "' does not match group '" +
                              group.subject_id + "'");
      }
      if (record.predictions.size() != schema.size()) {
        throw ValidationError("record '" + record.image_id + "' has " +
                              std::to_string(record.predictions.size()) +
                              " predictions, schema expects " +
                              std::to_string(schema.size()));
      }
      if (!image_ids.insert(record.image_id).second) {
        throw ValidationError("duplicate image id: " + record.image_id);
      }
      for (std::size_t j = 0; j < record.predictions.size(); ++j) {
        const auto& pred = record.predictions[j];
        if (pred.p_pos < 0.0 || pred.p_pos > 1.0 || pred.p_neg < 0.0 || pred.p_neg > 1.0) {
          throw ValidationError("record '" + record.image_id + "', attribute '" +
                                schema.names[j] + "': probability outside [0,1]");
        }
        if (std::abs(pred.p_pos + pred.p_neg - 1.0) > kProbabilitySumTolerance) {
          throw ValidationError("record '" + record.image_id + "', attribute '" +
                                schema.names[j] + "': probabilities do not sum to 1");
        }
        if (pred.label != binary_label(pred)) {
          throw ValidationError("record '" + record.image_id + "', attribute '" +
                                schema.names[j] + "': label disagrees with probabilities");
        }
      }
    }
  }
}

}  // namespace attrcons
