// Regenerates the Henri mock fixtures and decision files.
//
//   ontoforge-mockgen <fixture-dir>
//
// Runs <fixture-dir>/plan.txt through the CLI with a scripted provider, records
// every exchange under <fixture-dir>/mock and writes each decision file named
// by the plan from the proposals pending at that point.

#include <fstream>
#include <iostream>
#include <sstream>

#include "app.hpp"
#include "ontoforge/proposal.hpp"

using namespace ontoforge;
using nlohmann::json;

namespace {

const char* kQueryPrefix = "PREFIX ucpo: <http://vivocaz.fr/ucpo/ns#>\n";

std::string block(const std::vector<json>& proposals) {
  return "```json\n" + json{{"proposals", json(proposals)}}.dump(2) + "\n```";
}

json item(const std::string& kind, json payload) { return {{"kind", kind}, {"payload", std::move(payload)}}; }

struct Entity {
  std::string name;
  std::string label;
  std::string comment;
};

const std::vector<Entity> kAnnotated = {
    {"Brand", "brand", "A manufacturer whose vehicles a user may favour."},
    {"Budget", "budget", "The amount a user is prepared to spend on a vehicle."},
    {"ElectricVehicle", "electric vehicle", "A vehicle driven by an electric motor."},
    {"Preference", "preference", "Something a user wants from a product or service."},
    {"User", "user", "A person with an account on the sales platform."},
    {"UserProfile", "user profile", "One facet of a user, tied to a purpose such as work or family driving."},
    {"Vehicle", "vehicle", "A road vehicle offered for sale."},
    {"VehicleModel", "vehicle model", "A commercial model of a vehicle, such as a specific hatchback."},
    {"VehiclePreference", "vehicle preference", "The requirements a profile places on a recommended vehicle."},
    {"VehicleType", "vehicle type", "A body style such as sedan, SUV or hatchback."},
    {"firstName", "first name", "The given name of a user."},
    {"hasBrand", "has brand", "Links a vehicle model to its manufacturer."},
    {"hasDrivingPurpose", "driving purpose", "What the profile's vehicle is for, e.g. professional or family."},
    {"hasEngineType", "engine type", "The kind of engine a vehicle model uses."},
    {"hasFavoriteBrand", "favourite brand", "A brand the preference favours."},
    {"hasFuelEfficiency", "fuel efficiency", "Minimum fuel efficiency asked for, in miles per gallon."},
    {"hasUserProfile", "has user profile", "Links a user to one of their profiles."},
    {"hasVehiclePreference", "has vehicle preference", "Links a profile to a vehicle preference."},
    {"numberOfPlaces", "number of places", "Seats the vehicle must provide."},
    {"recommendsVehicle", "recommends vehicle", "A vehicle model recommended for the preference."},
};

json theme_safety() {
  return {{"theme", "safety features are missing"},
          {"sentiment", "Negative"},
          {"supporting", {"FB001", "FB003", "FB004"}},
          {"quote", "Safety features such as emergency braking are not represented on vehicles at all."},
          {"action", "Add a hasSafetyFeature property to the Vehicle class."},
          {"rank", 1}};
}

json theme_explanations() {
  return {{"theme", "recommendations lack explanations"},
          {"sentiment", "Mixed"},
          {"supporting", {"FB002"}},
          {"quote", "I would like to know why a model was picked."},
          {"action", "Show the matching preference next to each recommendation."},
          {"rank", 2}};
}

json theme_profiles() {
  return {{"theme", "separate profiles work well"},
          {"sentiment", "Positive"},
          {"supporting", {"FB005"}},
          {"quote", "Splitting work and family profiles matches how our customers actually shop."},
          {"action", "Keep the profile structure."},
          {"rank", 3}};
}

json instance(const std::string& name, const std::string& type, json properties = json::array()) {
  json p = {{"name", name}, {"type", type}};
  if (!properties.empty()) p["properties"] = std::move(properties);
  return item("Instance", p);
}

json link(const std::string& property, const std::string& object) {
  return {{"property", property}, {"object", object}};
}

json value(const std::string& property, json v) { return {{"property", property}, {"value", std::move(v)}}; }

std::vector<json> henri_instances() {
  std::vector<json> out = {
      instance("Henri", "User",
               {value("firstName", "Henri"), link("hasUserProfile", "HenriProfessionalProfile"),
                link("hasUserProfile", "HenriFamilyProfile")}),
      instance("HenriProfessionalProfile", "UserProfile",
               {value("hasDrivingPurpose", "professional"), link("hasVehiclePreference", "HenriCommutePreference"),
                link("hasVehiclePreference", "HenriCompactPreference"),
                link("hasVehiclePreference", "HenriSedanPreference")}),
      instance("HenriFamilyProfile", "UserProfile",
               {value("hasDrivingPurpose", "family"), link("hasVehiclePreference", "HenriFamilyPreference")}),
      instance("HenriCommutePreference", "VehiclePreference",
               {value("hasFuelEfficiency", 45), link("hasFavoriteBrand", "Renault"),
                link("recommendsVehicle", "RenaultZoe"), link("recommendsVehicle", "PeugeotE208"),
                link("recommendsVehicle", "ToyotaYarisHybrid")}),
      instance("HenriCompactPreference", "VehiclePreference",
               {value("hasFuelEfficiency", 32), link("recommendsVehicle", "Peugeot5008Hybrid"),
                link("recommendsVehicle", "KiaNiro")}),
      instance("HenriSedanPreference", "VehiclePreference",
               {value("hasFuelEfficiency", 24), link("recommendsVehicle", "VolkswagenPassat")}),
      instance("HenriFamilyPreference", "VehiclePreference",
               {value("hasFuelEfficiency", 28), value("numberOfPlaces", 7), link("hasFavoriteBrand", "Volvo"),
                link("recommendsVehicle", "Peugeot5008Hybrid"), link("recommendsVehicle", "RenaultEspace"),
                link("recommendsVehicle", "VolvoXC90")}),
  };
  const std::vector<std::pair<std::string, std::string>> models = {
      {"RenaultZoe", "Renault"},           {"PeugeotE208", "Peugeot"},         {"ToyotaYarisHybrid", "Toyota"},
      {"Peugeot5008Hybrid", "Peugeot"},    {"KiaNiro", "Kia"},                 {"VolkswagenPassat", "Volkswagen"},
      {"RenaultEspace", "Renault"},        {"VolvoXC90", "Volvo"}};
  for (const auto& [model, brand] : models) out.push_back(instance(model, "VehicleModel", {link("hasBrand", brand)}));
  for (const char* brand : {"Kia", "Peugeot", "Renault", "Toyota", "Volkswagen", "Volvo"}) {
    out.push_back(instance(brand, "Brand"));
  }
  return out;
}

void script_henri(ScriptProvider& s) {
  s.add("ScenarioGlossary",
        {"Terms found in the excerpts:\n" +
         block({item("GlossaryTerm", {{"term", "User Profile"},
                                      {"interpretation", "One purpose-specific view of a user, such as work or family."}}),
                item("GlossaryTerm", {{"term", "User Context"},
                                      {"interpretation", "Time, place, device and activity around an interaction."}}),
                item("GlossaryTerm", {{"term", "Vehicle Preference"},
                                      {"interpretation", "What a profile requires from a car."}}),
                item("GlossaryTerm", {{"term", "Driving Purpose"},
                                      {"interpretation", "Why the car is needed: professional or family use."}}),
                item("GlossaryTerm", {{"term", "Emotional State"},
                                      {"interpretation", "How the user feels while browsing."}})})});

  s.add("CompetencyQuestions",
        {block({item("CompetencyQuestion", {{"id", "CQ01"}, {"question", "Which driving purposes do a user's profiles serve?"}}),
                item("CompetencyQuestion",
                     {{"id", "CQ02"},
                      {"question", "Which vehicle models are recommended for the professional profile at a fuel efficiency above 30?"}}),
                item("CompetencyQuestion", {{"id", "CQ03"}, {"question", "Which brands does a user favour?"}}),
                item("CompetencyQuestion",
                     {{"id", "CQ04"}, {"question", "Which vehicle models suit both the professional and the family profile?"}}),
                item("CompetencyQuestion", {{"id", "CQ05"}, {"question", "How many seats does a family preference require?"}}),
                item("CompetencyQuestion", {{"id", "CQ06"}, {"question", "Which music does the user play while driving?"}})})});

  s.add("ModeletDevelopment/step1",
        {"Core attributes: the user, the profiles, vehicle preferences with type, brand and budget, and the "
         "recommended vehicle models."});
  s.add("ModeletDevelopment/step2",
        {"Context: each profile has a driving purpose (commute or family). Family size drives the number of seats; "
         "commuting drives fuel efficiency."});
  auto cls = [](const std::string& name, const std::string& definition, const std::string& parent = "") {
    json p = {{"name", name}, {"definition", definition}};
    if (!parent.empty()) p["parent"] = parent;
    return item("ClassDef", p);
  };
  auto obj = [](const std::string& name, const std::string& domain, const std::string& range) {
    return item("ObjectPropertyDef", {{"name", name}, {"domain", domain}, {"range", range}});
  };
  auto data = [](const std::string& name, const std::string& domain, const std::string& range) {
    return item("DataPropertyDef", {{"name", name}, {"domain", domain}, {"range", range}});
  };
  s.add("ModeletDevelopment/step3",
        {"Structure for review:\n" +
         block({cls("User", "A person with an account."), cls("UserProfile", "A purpose-specific view of a user."),
                cls("Preference", "Something a user wants."),
                cls("VehiclePreference", "Requirements on a vehicle.", "Preference"),
                cls("VehicleType", "A body style.", "Preference"), cls("Budget", "A spending range.", "Preference"),
                cls("Brand", "A manufacturer.", "Preference"), cls("Vehicle", "A road vehicle."),
                cls("VehicleModel", "A commercial vehicle model.", "Vehicle"),
                obj("hasUserProfile", "User", "UserProfile"),
                obj("hasVehiclePreference", "UserProfile", "VehiclePreference"),
                obj("recommendsVehicle", "VehiclePreference", "VehicleModel"),
                obj("hasFavoriteBrand", "VehiclePreference", "Brand"), obj("hasBrand", "VehicleModel", "Brand"),
                data("firstName", "User", "string"), data("hasDrivingPurpose", "UserProfile", "string"),
                data("hasFuelEfficiency", "VehiclePreference", "integer"),
                data("numberOfPlaces", "VehiclePreference", "integer")})});

  auto test = [](const std::string& cq, const std::string& body, json expectation = nullptr) {
    json p = {{"cqId", cq}, {"query", std::string(kQueryPrefix) + body}};
    if (!expectation.is_null()) p["expectation"] = std::move(expectation);
    return block({item("SparqlTest", p)});
  };
  s.add("TestCaseGeneration/CQ01",
        {test("CQ01",
              "SELECT ?user ?purpose\nWHERE {\n  ?user ucpo:hasUserProfile ?profile .\n"
              "  ?profile ucpo:hasDrivingPurpose ?purpose .\n}",
              {{"type", "ExactRows"}, {"n", 2}})});
  s.add("TestCaseGeneration/CQ02",
        {test("CQ02",
              "SELECT ?vehicleModel ?efficiency\nWHERE {\n  ?profile ucpo:hasDrivingPurpose \"professional\" .\n"
              "  ?profile ucpo:hasVehiclePreference ?vp .\n  ?vp ucpo:hasFuelEfficiency ?efficiency ;\n"
              "  ucpo:recommendsVehicle ?vehicleModel .\n  FILTER(?efficiency > 30)\n}",
              {{"type", "ExactRows"}, {"n", 5}})});
  s.add("TestCaseGeneration/CQ03",
        {test("CQ03",
              "SELECT ?user ?brand\nWHERE {\n  ?user ucpo:hasUserProfile ?userProfile .\n"
              "  ?userProfile ucpo:hasVehiclePreference ?preference .\n"
              "  ?preference ucpo:hasFavoriteBrand ?brand .\n} ORDER BY ?brand LIMIT 10",
              {{"type", "ContainsBinding"}, {"var", "brand"}, {"value", "ucpo:Volvo"}})});
  s.add("TestCaseGeneration/CQ04",
        {test("CQ04",
              "SELECT ?vehicleModel\nWHERE {\n  ?work ucpo:hasDrivingPurpose \"professional\" .\n"
              "  ?work ucpo:hasVehiclePreference ?workPreference .\n"
              "  ?workPreference ucpo:recommendsVehicle ?vehicleModel .\n"
              "  ?family ucpo:hasDrivingPurpose \"family\" .\n"
              "  ?family ucpo:hasVehiclePreference ?familyPreference .\n"
              "  ?familyPreference ucpo:recommendsVehicle ?vehicleModel .\n}",
              {{"type", "ExactRows"}, {"n", 1}})});
  s.add("TestCaseGeneration/CQ05",
        {test("CQ05",
              "SELECT ?preference ?seats\nWHERE {\n  ?profile ucpo:hasDrivingPurpose \"family\" .\n"
              "  ?profile ucpo:hasVehiclePreference ?preference .\n"
              "  ?preference ucpo:numberOfPlaces ?seats .\n  FILTER(?seats >= 5)\n}")});
  s.add("TestCaseGeneration/instances", {"Example individuals for Henri:\n" + block(henri_instances())});

  const auto electric = cls("ElectricVehicle", "A vehicle driven by an electric motor.", "Vehicle");
  const auto engine = data("hasEngineType", "VehicleModel", "string");
  const auto fuel = cls("FuelType", "The energy source of a vehicle.");
  s.add("ModelRefinement", {block({electric, engine}), block({electric, fuel}), block({engine, electric})});

  for (const auto& e : kAnnotated) {
    s.add("DocumentGeneration/ucpo:" + e.name,
          {block({item("Annotation", {{"entity", "ucpo:" + e.name}, {"label", e.label}, {"comment", e.comment}})})});
  }

  s.add("Feedback/1", {"Themes, most pressing first:\n" +
                       block({item("Revision", theme_safety()), item("Revision", theme_explanations()),
                              item("Revision", theme_profiles())})});
  s.add("Feedback/" + proposal_id(ProposalKind::Revision, theme_safety()),
        {block({item("DataPropertyDef", {{"name", "hasSafetyFeature"},
                                         {"domain", "Vehicle"},
                                         {"range", "string"},
                                         {"definition", "A safety system fitted to the vehicle."}})})});
}

/// Reviewer choices for the Henri walkthrough; everything else is accepted.
Decision decide(const Proposal& p) {
  const json& pl = p.payload;
  auto reject = [&](const std::string& reason) { return Decision{p.id, Verdict::Reject, std::nullopt, reason}; };
  switch (p.kind) {
    case ProposalKind::GlossaryTerm:
      if (pl["term"] == "Emotional State") return reject("outside the sales scope");
      if (pl["term"] == "Vehicle Preference") {
        json edited = pl;
        edited["interpretation"] = "What a profile requires from a car: type, brand, budget, efficiency or seats.";
        return {p.id, Verdict::Edit, edited, "more precise"};
      }
      break;
    case ProposalKind::CompetencyQuestion:
      if (pl["id"] == "CQ06") return reject("not a sales concern");
      break;
    case ProposalKind::Revision:
      if (pl["rank"] != 1) return reject("no model change needed");
      break;
    default:
      break;
  }
  return {p.id, Verdict::Accept, std::nullopt, std::nullopt};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: ontoforge-mockgen <fixture-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = std::filesystem::absolute(argv[1]);
  try {
    const auto mock = dir / "mock";
    std::filesystem::remove_all(mock);
    std::filesystem::create_directories(mock);
    const auto project = std::filesystem::temp_directory_path() / "ontoforge-mockgen.json";
    std::filesystem::remove(project);

    ScriptProvider script;
    script_henri(script);
    RecordingProvider recorder(script, mock);

    for (const auto& step : app::read_plan(dir / "plan.txt", {{"FIXTURE", dir.string()}})) {
      if (step.args.at(0) == "replay") continue;
      if (step.args.size() == 3 && step.args[0] == "review" && step.args[1] == "apply") {
        json decisions = json::array();
        for (const auto& p : load_project(project).proposals) {
          if (p.status == ProposalStatus::Pending) decisions.push_back(to_json(decide(p)));
        }
        std::ofstream(step.args[2]) << decisions.dump(2) << "\n";
      }
      std::vector<std::string> args = {"-q", "-p", project.string()};
      args.insert(args.end(), step.args.begin(), step.args.end());
      std::ostringstream out;
      const int code = app::run(args, out, std::cerr, &recorder);
      if (code != step.expected_exit) {
        std::cerr << "plan line " << step.line << " exited " << code << ", expected " << step.expected_exit << "\n"
                  << out.str();
        return 1;
      }
    }
    if (const auto unused = script.unused_labels(); !unused.empty()) {
      for (const auto& l : unused) std::cerr << "unused reply: " << l << "\n";
      return 1;
    }
    std::filesystem::remove(project);
    std::filesystem::remove(project.string() + ".lock");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
