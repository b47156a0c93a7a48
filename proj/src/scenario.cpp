#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "acoca/workload.hpp"

namespace acoca {

namespace {

struct AttrRow {
  const char* id;
  const char* entity;
  std::vector<const char*> providers;
  Seconds lifetime;
};

struct ProviderRow {
  const char* id;
  Seconds latency_mean;
  double latency_var;
  double sampling_rate;
  double cost;
};

struct SlaRow {
  const char* id;
  double price;
  double f_thresh;
  double delay_penalty;
  double invalid_penalty;
  Seconds rt_max;
};

struct TemplateRow {
  const char* id;
  std::vector<const char*> attributes;
  const char* sla;
  double weight;
};

const std::vector<ProviderRow>& provider_rows() {
  static const std::vector<ProviderRow> rows = {
      {"p01_car_telematics", 0.997, 0.012, 1.0, 0.25},
      {"p02_car_registry", 1.20, 0.020, 0.01, 0.40},
      {"p03_carpark_system", 0.997, 0.012, 0.2, 0.30},
      {"p04_carpark_pricing", 1.10, 0.015, 0.01, 0.20},
      {"p05_maps_api", 0.90, 0.010, 0.001, 0.35},
      {"p06_rating_api", 1.30, 0.030, 0.002, 0.30},
      {"p07_weather_station", 0.95, 0.012, 0.1, 0.25},
      {"p08_weather_forecast", 1.05, 0.012, 0.05, 0.30},
      {"p09_weather_backup", 1.40, 0.025, 0.05, 0.20},
      {"p10_park_sensors", 0.85, 0.010, 0.2, 0.20},
      {"p11_air_monitor", 1.00, 0.012, 0.1, 0.25},
      {"p12_address_registry", 1.10, 0.015, 0.001, 0.30},
      {"p13_building_bms", 0.80, 0.008, 0.2, 0.20},
      {"p14_bike_dock", 0.90, 0.010, 0.5, 0.20},
      {"p15_traffic_cam", 0.997, 0.012, 1.0, 0.30},
      {"p16_signal_controller", 0.60, 0.005, 1.0, 0.15},
      {"p17_lidar_unit", 1.25, 0.020, 2.0, 0.35},
      {"p18_rider_phone", 0.997, 0.012, 1.0, 0.20},
      {"p19_smartwatch", 0.70, 0.006, 1.0, 0.15},
      {"p20_carpark_system_b", 1.35, 0.030, 0.2, 0.25},
      {"p21_traffic_api", 1.15, 0.015, 0.2, 0.25},
      {"p22_rider_gps", 1.30, 0.020, 1.0, 0.20},
      {"p23_pricing_aggregator", 1.45, 0.030, 0.01, 0.15},
      {"p24_uv_sensor", 1.20, 0.015, 0.05, 0.20},
      {"p25_car_obd", 1.10, 0.012, 1.0, 0.20},
  };
  return rows;
}

const std::vector<AttrRow>& attribute_rows() {
  static const std::vector<AttrRow> rows = {
      {"car.location", "car", {"p01_car_telematics"}, 5},
      {"car.speed", "car", {"p01_car_telematics", "p25_car_obd"}, 5},
      {"car.direction", "car", {"p01_car_telematics"}, 10},
      {"car.vin", "car", {"p02_car_registry"}, kInfinite},
      {"carpark.available_slots", "carpark", {"p03_carpark_system", "p20_carpark_system_b"}, 40},
      {"carpark.price", "carpark", {"p04_carpark_pricing", "p23_pricing_aggregator"}, 300},
      {"carpark.location", "carpark", {"p05_maps_api"}, kInfinite},
      {"carpark.rating", "carpark", {"p06_rating_api"}, 600},
      {"weather.temperature", "weather", {"p07_weather_station", "p09_weather_backup"}, 120},
      {"weather.rain_probability", "weather", {"p08_weather_forecast"}, 180},
      {"weather.wind", "weather", {"p07_weather_station"}, 60},
      {"weather.uv_index", "weather", {"p08_weather_forecast", "p24_uv_sensor"}, 300},
      {"park.location", "park", {"p05_maps_api"}, kInfinite},
      {"park.crowd_level", "park", {"p10_park_sensors"}, 60},
      {"park.air_quality", "park", {"p11_air_monitor"}, 120},
      {"building.address", "building", {"p12_address_registry"}, kInfinite},
      {"building.location", "building", {"p05_maps_api"}, kInfinite},
      {"building.occupancy", "building", {"p13_building_bms"}, 60},
      {"bike.available_spots", "bike_station", {"p14_bike_dock"}, 20},
      {"bike.location", "bike_station", {"p05_maps_api"}, kInfinite},
      {"intersection.traffic_level", "intersection", {"p15_traffic_cam", "p21_traffic_api"}, 15},
      {"intersection.signal_phase", "intersection", {"p16_signal_controller"}, 8},
      {"intersection.obstacles", "intersection", {"p15_traffic_cam", "p17_lidar_unit"}, 6},
      {"rider.location", "rider", {"p18_rider_phone", "p22_rider_gps"}, 4},
      {"rider.speed", "rider", {"p18_rider_phone"}, 4},
      {"rider.heart_rate", "rider", {"p19_smartwatch"}, 10},
  };
  return rows;
}

const std::vector<SlaRow>& sla_rows() {
  static const std::vector<SlaRow> rows = {
      {"sla_driver_1", 1.50, 0.60, 2.00, 1.00, 1.00},
      {"sla_driver_2", 2.00, 0.60, 2.50, 1.20, 1.10},
      {"sla_navigator", 1.80, 0.70, 2.00, 1.00, 1.00},
      {"sla_pedestrian", 1.20, 0.50, 1.50, 0.80, 1.20},
      {"sla_jogger", 1.00, 0.50, 1.20, 0.80, 1.20},
      {"sla_rider", 1.50, 0.70, 2.50, 1.50, 0.90},
      {"sla_safety", 3.00, 0.80, 3.00, 2.00, 0.80},
      {"sla_traffic", 1.60, 0.65, 2.00, 1.00, 1.00},
  };
  return rows;
}

const std::vector<TemplateRow>& template_rows() {
  static const std::vector<TemplateRow> rows = {
      {"sq01_get_carparks", {"carpark.available_slots", "carpark.location"}, "sla_driver_1", 3.0},
      {"sq02_carparks_under_price",
       {"carpark.available_slots", "carpark.price", "carpark.location"}, "sla_driver_2", 2.0},
      {"sq03_carparks_near_target",
       {"carpark.available_slots", "carpark.location", "car.location"}, "sla_navigator", 1.5},
      {"sq04_good_for_walking",
       {"weather.temperature", "weather.rain_probability", "weather.wind"}, "sla_pedestrian", 2.0},
      {"sq05_carpark_buildings",
       {"carpark.available_slots", "carpark.location", "building.address", "building.location"},
       "sla_pedestrian", 1.0},
      {"sq06_good_for_jogging",
       {"weather.temperature", "weather.rain_probability", "park.air_quality", "park.crowd_level"},
       "sla_jogger", 1.5},
      {"sq07_bike_spots", {"bike.available_spots", "bike.location", "rider.location"}, "sla_rider",
       1.0},
      {"sq08_crash_risk",
       {"rider.location", "rider.speed", "intersection.obstacles", "intersection.signal_phase",
        "car.location", "car.speed"},
       "sla_safety", 1.0},
      {"sq09_alternate_route", {"intersection.traffic_level", "car.location", "car.direction"},
       "sla_traffic", 1.0},
      {"sq10_vehicle_profile", {"car.vin", "car.speed"}, "sla_navigator", 0.5},
      {"sq11_weather_now", {"weather.temperature", "weather.uv_index", "weather.rain_probability"},
       "sla_jogger", 2.0},
      {"sq12_rider_vitals", {"rider.heart_rate", "rider.location"}, "sla_rider", 0.5},
  };
  return rows;
}

ContextCatalog bundled_catalog() {
  ContextCatalog c;
  for (const auto& p : provider_rows()) {
    c.providers[p.id] = ContextProvider{p.id, p.latency_mean, p.latency_var, p.sampling_rate,
                                        Money::from_double(p.cost), 1.0};
  }
  for (const auto& a : attribute_rows()) {
    ContextAttribute attr{a.id, a.entity, {}, a.lifetime};
    for (const char* p : a.providers) attr.provider_ids.emplace_back(p);
    c.attributes[a.id] = attr;
    auto& e = c.entities[a.entity];
    e.entity_id = a.entity;
    e.attribute_ids.insert(a.id);
  }
  for (const auto& s : sla_rows()) {
    c.slas[s.id] = ConsumerSla{s.id,
                               Money::from_double(s.price),
                               s.f_thresh,
                               Money::from_double(s.delay_penalty),
                               Money::from_double(s.invalid_penalty),
                               s.rt_max};
  }
  return c;
}

SubQueryTemplate make_template(const ContextCatalog& c, Id id, const std::set<Id>& attrs, Id sla,
                               double weight) {
  SubQueryTemplate t;
  t.template_id = std::move(id);
  t.attribute_ids = attrs;
  for (const auto& a : attrs) t.entity_ids.insert(c.attributes.at(a).entity_id);
  t.sla_id = std::move(sla);
  t.weight = weight;
  return t;
}

}  // namespace

Scenario bundled_scenario() {
  Scenario s;
  s.catalog = bundled_catalog();
  s.workload.lambda_rate = 2.5;
  s.workload.duration = 600;
  s.workload.seed = 42;
  for (const auto& t : template_rows()) {
    std::set<Id> attrs(t.attributes.begin(), t.attributes.end());
    s.workload.templates.push_back(make_template(s.catalog, t.id, attrs, t.sla, t.weight));
  }
  return s;
}

Scenario expanded_scenario(std::size_t unique_count) {
  Scenario s = bundled_scenario();
  s.workload.templates.clear();

  std::vector<Id> attrs;
  for (const auto& [id, _] : s.catalog.attributes) attrs.push_back(id);
  std::vector<Id> slas;
  for (const auto& [id, _] : s.catalog.slas) slas.push_back(id);

  // Subsets of size 1..3 in lexicographic order; each gets one SLA.
  const std::size_t n = attrs.size();
  std::size_t k = 0;
  auto emit = [&](std::set<Id> set) {
    if (k >= unique_count) return;
    const double weight = 1.0 / static_cast<double>(1 + (k * 7919) % 97);
    char name[32];
    std::snprintf(name, sizeof name, "usq%04zu", k);
    s.workload.templates.push_back(make_template(s.catalog, name, set, slas[k % slas.size()], weight));
    ++k;
  };
  for (std::size_t i = 0; i < n; ++i) emit({attrs[i]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) emit({attrs[i], attrs[j]});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t l = j + 1; l < n; ++l) emit({attrs[i], attrs[j], attrs[l]});
  if (k < unique_count)
    throw std::invalid_argument("expanded_scenario: catalog too small for requested unique count");
  return s;
}

}  // namespace acoca
