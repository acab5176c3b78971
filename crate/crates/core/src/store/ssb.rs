//! Star-schema benchmark data generator.
//!
//! Value domains follow the usual SSB definitions (years 1992-1998, 25
//! nations in 5 regions, cities = 9-character nation prefix plus a digit,
//! 5 manufacturers x 5 categories x 40 brands, discount 0-10, quantity
//! 1-50). Where the reference generator draws from distributions the draws
//! here are uniform. Table sizes: `lineorder` ~ 6M x SF rows (1.5M x SF
//! orders with 1-7 lines each), `customer` 30k x SF, `supplier` 2k x SF,
//! `part` 200k x (1 + floor(log2 SF)) for SF >= 1 and 200k x SF below.
//!
//! Money columns are DECIMAL(15,2); dates are day numbers.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{date_to_days, Column, ColumnDef, Database, ForeignKey, LogicalType, Table, TableDef};
use crate::error::{Error, Result};

pub const NATIONS: [(&str, &str); 25] = [
    ("ALGERIA", "AFRICA"),
    ("ARGENTINA", "AMERICA"),
    ("BRAZIL", "AMERICA"),
    ("CANADA", "AMERICA"),
    ("EGYPT", "MIDDLE EAST"),
    ("ETHIOPIA", "AFRICA"),
    ("FRANCE", "EUROPE"),
    ("GERMANY", "EUROPE"),
    ("INDIA", "ASIA"),
    ("INDONESIA", "ASIA"),
    ("IRAN", "MIDDLE EAST"),
    ("IRAQ", "MIDDLE EAST"),
    ("JAPAN", "ASIA"),
    ("JORDAN", "MIDDLE EAST"),
    ("KENYA", "AFRICA"),
    ("MOROCCO", "AFRICA"),
    ("MOZAMBIQUE", "AFRICA"),
    ("PERU", "AMERICA"),
    ("CHINA", "ASIA"),
    ("ROMANIA", "EUROPE"),
    ("SAUDI ARABIA", "MIDDLE EAST"),
    ("VIETNAM", "ASIA"),
    ("RUSSIA", "EUROPE"),
    ("UNITED KINGDOM", "EUROPE"),
    ("UNITED STATES", "AMERICA"),
];

const COLORS: [&str; 92] = [
    "almond", "antique", "aquamarine", "azure", "beige", "bisque", "black", "blanched", "blue", "blush",
    "brown", "burlywood", "burnished", "chartreuse", "chiffon", "chocolate", "coral", "cornflower",
    "cornsilk", "cream", "cyan", "dark", "deep", "dim", "dodger", "drab", "firebrick", "floral", "forest",
    "frosted", "gainsboro", "ghost", "goldenrod", "green", "grey", "honeydew", "hot", "indian", "ivory",
    "khaki", "lace", "lavender", "lawn", "lemon", "light", "lime", "linen", "magenta", "maroon", "medium",
    "metallic", "midnight", "mint", "misty", "moccasin", "navajo", "navy", "olive", "orange", "orchid",
    "pale", "papaya", "peach", "peru", "pink", "plum", "powder", "puff", "purple", "red", "rose", "rosy",
    "royal", "saddle", "salmon", "sandy", "seashell", "sienna", "sky", "slate", "smoke", "snow", "spring",
    "steel", "tan", "thistle", "tomato", "turquoise", "violet", "wheat", "white", "yellow",
];

const TYPE_1: [&str; 6] = ["STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"];
const TYPE_2: [&str; 5] = ["ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"];
const TYPE_3: [&str; 5] = ["TIN", "NICKEL", "BRASS", "STEEL", "COPPER"];
const CONTAINER_1: [&str; 5] = ["SM", "LG", "MED", "JUMBO", "WRAP"];
const CONTAINER_2: [&str; 8] = ["CASE", "BOX", "BAG", "JAR", "PKG", "PACK", "CAN", "DRUM"];
const SEGMENTS: [&str; 5] = ["AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"];
const PRIORITIES: [&str; 5] = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECI", "5-LOW"];
const SHIP_MODES: [&str; 7] = ["REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"];
const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];
const DAYS: [&str; 7] = ["Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"];

const MONEY: LogicalType = LogicalType::Decimal { precision: 15, scale: 2 };

/// Row counts for a scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsbCardinality {
    pub orders: usize,
    pub customers: usize,
    pub suppliers: usize,
    pub parts: usize,
}

pub fn cardinality(sf: f64) -> Result<SsbCardinality> {
    if !(sf > 0.0 && sf.is_finite()) {
        return Err(Error::Invalid(format!("scale factor must be positive, got {sf}")));
    }
    let scaled = |base: f64| ((base * sf).round() as usize).max(1);
    let parts = if sf >= 1.0 {
        200_000 * (1 + sf.log2().floor() as usize)
    } else {
        scaled(200_000.0)
    };
    Ok(SsbCardinality { orders: scaled(1_500_000.0), customers: scaled(30_000.0), suppliers: scaled(2_000.0), parts })
}

fn cols(specs: &[(&str, LogicalType)]) -> Vec<ColumnDef> {
    specs.iter().map(|(n, t)| ColumnDef::new(*n, *t)).collect()
}

fn fk(column: &str, table: &str) -> ForeignKey {
    ForeignKey { column: column.into(), table: table.into() }
}

pub fn lineorder_def() -> TableDef {
    use LogicalType::*;
    TableDef {
        name: "lineorder".into(),
        columns: cols(&[
            ("lo_orderkey", Int),
            ("lo_linenumber", Int),
            ("lo_custkey", Int),
            ("lo_partkey", Int),
            ("lo_suppkey", Int),
            ("lo_orderdate", Date),
            ("lo_orderpriority", Text),
            ("lo_shippriority", Int),
            ("lo_quantity", Int),
            ("lo_extendedprice", MONEY),
            ("lo_ordtotalprice", MONEY),
            ("lo_discount", Int),
            ("lo_revenue", MONEY),
            ("lo_supplycost", MONEY),
            ("lo_tax", Int),
            ("lo_commitdate", Date),
            ("lo_shipmode", Text),
        ]),
        primary_key: None,
        foreign_keys: vec![
            fk("lo_custkey", "customer"),
            fk("lo_partkey", "part"),
            fk("lo_suppkey", "supplier"),
            fk("lo_orderdate", "date"),
        ],
    }
}

pub fn date_def() -> TableDef {
    use LogicalType::*;
    TableDef {
        name: "date".into(),
        columns: cols(&[
            ("d_datekey", Date),
            ("d_date", Text),
            ("d_dayofweek", Text),
            ("d_month", Text),
            ("d_year", Int),
            ("d_yearmonthnum", Int),
            ("d_yearmonth", Text),
            ("d_daynuminweek", Int),
            ("d_daynuminmonth", Int),
            ("d_daynuminyear", Int),
            ("d_monthnuminyear", Int),
            ("d_weeknuminyear", Int),
            ("d_sellingseason", Text),
            ("d_lastdayinweekfl", Int),
            ("d_lastdayinmonthfl", Int),
            ("d_holidayfl", Int),
            ("d_weekdayfl", Int),
        ]),
        primary_key: Some("d_datekey".into()),
        foreign_keys: vec![],
    }
}

pub fn customer_def() -> TableDef {
    use LogicalType::*;
    TableDef {
        name: "customer".into(),
        columns: cols(&[
            ("c_custkey", Int),
            ("c_name", Text),
            ("c_address", Text),
            ("c_city", Text),
            ("c_nation", Text),
            ("c_region", Text),
            ("c_phone", Text),
            ("c_mktsegment", Text),
        ]),
        primary_key: Some("c_custkey".into()),
        foreign_keys: vec![],
    }
}

pub fn supplier_def() -> TableDef {
    use LogicalType::*;
    TableDef {
        name: "supplier".into(),
        columns: cols(&[
            ("s_suppkey", Int),
            ("s_name", Text),
            ("s_address", Text),
            ("s_city", Text),
            ("s_nation", Text),
            ("s_region", Text),
            ("s_phone", Text),
        ]),
        primary_key: Some("s_suppkey".into()),
        foreign_keys: vec![],
    }
}

pub fn part_def() -> TableDef {
    use LogicalType::*;
    TableDef {
        name: "part".into(),
        columns: cols(&[
            ("p_partkey", Int),
            ("p_name", Text),
            ("p_mfgr", Text),
            ("p_category", Text),
            ("p_brand1", Text),
            ("p_color", Text),
            ("p_type", Text),
            ("p_size", Int),
            ("p_container", Text),
        ]),
        primary_key: Some("p_partkey".into()),
        foreign_keys: vec![],
    }
}

pub fn ssb_schema() -> super::Schema {
    super::Schema { tables: vec![lineorder_def(), date_def(), customer_def(), supplier_def(), part_def()] }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn city(nation: &str, digit: u32) -> String {
    format!("{:<9.9}{digit}", nation)
}

fn address(rng: &mut ChaCha8Rng) -> String {
    const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,";
    let len = rng.gen_range(10..=25);
    (0..len).map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char).collect()
}

fn phone(rng: &mut ChaCha8Rng, nation: usize) -> String {
    format!(
        "{:02}-{:03}-{:03}-{:04}",
        nation + 10,
        rng.gen_range(100..1000),
        rng.gen_range(100..1000),
        rng.gen_range(1000..10000)
    )
}

/// Retail price in cents for a part key.
pub fn retail_price_cents(partkey: i64) -> i64 {
    90_000 + (partkey / 10) % 20_001 + 100 * (partkey % 1_000)
}

fn first_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(1992, 1, 1).expect("valid")
}

fn last_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(1998, 12, 31).expect("valid")
}

fn build(def: TableDef, columns: Vec<Column>) -> Result<Table> {
    Table::new(def, columns)
}

fn int_col(def: &TableDef, i: usize, v: &[i64]) -> Result<Column> {
    Column::from_ints(def.columns[i].clone(), v)
}

fn str_col<S: AsRef<str>>(def: &TableDef, i: usize, v: &[S]) -> Result<Column> {
    Column::from_strs(def.columns[i].clone(), v)
}

fn gen_date() -> Result<Table> {
    let def = date_def();
    let mut key = Vec::new();
    let mut date = Vec::new();
    let mut dow = Vec::new();
    let mut month = Vec::new();
    let mut year = Vec::new();
    let mut ymnum = Vec::new();
    let mut ym = Vec::new();
    let mut dnw = Vec::new();
    let mut dnm = Vec::new();
    let mut dny = Vec::new();
    let mut mny = Vec::new();
    let mut wny = Vec::new();
    let mut season = Vec::new();
    let mut lastweek = Vec::new();
    let mut lastmonth = Vec::new();
    let mut holiday = Vec::new();
    let mut weekday = Vec::new();
    let mut d = first_day();
    while d <= last_day() {
        let m = d.month0() as usize;
        key.push(date_to_days(d));
        date.push(format!("{} {}, {}", MONTHS[m], d.day(), d.year()));
        let wd = d.weekday().num_days_from_sunday() as usize;
        dow.push(DAYS[wd]);
        month.push(MONTHS[m]);
        year.push(d.year() as i64);
        ymnum.push(d.year() as i64 * 100 + m as i64 + 1);
        ym.push(format!("{}{}", &MONTHS[m][..3], d.year()));
        dnw.push(wd as i64 + 1);
        dnm.push(d.day() as i64);
        dny.push(d.ordinal() as i64);
        mny.push(m as i64 + 1);
        wny.push(d.ordinal0() as i64 / 7 + 1);
        season.push(match m {
            11 => "Christmas",
            5..=7 => "Summer",
            0 | 1 => "Winter",
            2..=4 => "Spring",
            _ => "Fall",
        });
        lastweek.push((d.weekday() == Weekday::Sat) as i64);
        lastmonth.push(((d + Duration::days(1)).month() != d.month()) as i64);
        holiday.push(matches!((m + 1, d.day()), (1, 1) | (7, 4) | (11, 11) | (12, 24) | (12, 25) | (12, 31)) as i64);
        weekday.push(!matches!(d.weekday(), Weekday::Sat | Weekday::Sun) as i64);
        d += Duration::days(1);
    }
    let columns = vec![
        int_col(&def, 0, &key)?,
        str_col(&def, 1, &date)?,
        str_col(&def, 2, &dow)?,
        str_col(&def, 3, &month)?,
        int_col(&def, 4, &year)?,
        int_col(&def, 5, &ymnum)?,
        str_col(&def, 6, &ym)?,
        int_col(&def, 7, &dnw)?,
        int_col(&def, 8, &dnm)?,
        int_col(&def, 9, &dny)?,
        int_col(&def, 10, &mny)?,
        int_col(&def, 11, &wny)?,
        str_col(&def, 12, &season)?,
        int_col(&def, 13, &lastweek)?,
        int_col(&def, 14, &lastmonth)?,
        int_col(&def, 15, &holiday)?,
        int_col(&def, 16, &weekday)?,
    ];
    build(def, columns)
}

fn gen_customer(n: usize, rng: &mut ChaCha8Rng) -> Result<Table> {
    let def = customer_def();
    let mut key = Vec::with_capacity(n);
    let (mut name, mut addr, mut cty, mut nat, mut reg, mut ph, mut seg) =
        (vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
    for k in 1..=n {
        let ni = rng.gen_range(0..NATIONS.len());
        key.push(k as i64);
        name.push(format!("Customer#{k:09}"));
        addr.push(address(rng));
        cty.push(city(NATIONS[ni].0, rng.gen_range(0..10)));
        nat.push(NATIONS[ni].0);
        reg.push(NATIONS[ni].1);
        ph.push(phone(rng, ni));
        seg.push(*SEGMENTS.choose(rng).expect("non-empty"));
    }
    let columns = vec![
        int_col(&def, 0, &key)?,
        str_col(&def, 1, &name)?,
        str_col(&def, 2, &addr)?,
        str_col(&def, 3, &cty)?,
        str_col(&def, 4, &nat)?,
        str_col(&def, 5, &reg)?,
        str_col(&def, 6, &ph)?,
        str_col(&def, 7, &seg)?,
    ];
    build(def, columns)
}

fn gen_supplier(n: usize, rng: &mut ChaCha8Rng) -> Result<Table> {
    let def = supplier_def();
    let mut key = Vec::with_capacity(n);
    let (mut name, mut addr, mut cty, mut nat, mut reg, mut ph) = (vec![], vec![], vec![], vec![], vec![], vec![]);
    for k in 1..=n {
        let ni = rng.gen_range(0..NATIONS.len());
        key.push(k as i64);
        name.push(format!("Supplier#{k:09}"));
        addr.push(address(rng));
        cty.push(city(NATIONS[ni].0, rng.gen_range(0..10)));
        nat.push(NATIONS[ni].0);
        reg.push(NATIONS[ni].1);
        ph.push(phone(rng, ni));
    }
    let columns = vec![
        int_col(&def, 0, &key)?,
        str_col(&def, 1, &name)?,
        str_col(&def, 2, &addr)?,
        str_col(&def, 3, &cty)?,
        str_col(&def, 4, &nat)?,
        str_col(&def, 5, &reg)?,
        str_col(&def, 6, &ph)?,
    ];
    build(def, columns)
}

fn gen_part(n: usize, rng: &mut ChaCha8Rng) -> Result<Table> {
    let def = part_def();
    let mut key = Vec::with_capacity(n);
    let (mut name, mut mfgr, mut cat, mut brand, mut color, mut ty, mut size, mut cont) =
        (vec![], vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
    for k in 1..=n {
        let m = rng.gen_range(1..=5);
        let c = rng.gen_range(1..=5);
        let b = rng.gen_range(1..=40);
        key.push(k as i64);
        let c1 = COLORS.choose(rng).expect("non-empty");
        let c2 = COLORS.choose(rng).expect("non-empty");
        name.push(format!("{c1} {c2}"));
        mfgr.push(format!("MFGR#{m}"));
        cat.push(format!("MFGR#{m}{c}"));
        brand.push(format!("MFGR#{m}{c}{b}"));
        color.push(*c1);
        ty.push(format!(
            "{} {} {}",
            TYPE_1.choose(rng).expect("non-empty"),
            TYPE_2.choose(rng).expect("non-empty"),
            TYPE_3.choose(rng).expect("non-empty")
        ));
        size.push(rng.gen_range(1..=50));
        cont.push(format!(
            "{} {}",
            CONTAINER_1.choose(rng).expect("non-empty"),
            CONTAINER_2.choose(rng).expect("non-empty")
        ));
    }
    let columns = vec![
        int_col(&def, 0, &key)?,
        str_col(&def, 1, &name)?,
        str_col(&def, 2, &mfgr)?,
        str_col(&def, 3, &cat)?,
        str_col(&def, 4, &brand)?,
        str_col(&def, 5, &color)?,
        str_col(&def, 6, &ty)?,
        int_col(&def, 7, &size)?,
        str_col(&def, 8, &cont)?,
    ];
    build(def, columns)
}

fn gen_lineorder(card: &SsbCardinality, rng: &mut ChaCha8Rng) -> Result<Table> {
    let def = lineorder_def();
    let cap = card.orders * 4 + 8;
    let mut c: Vec<Vec<i64>> = (0..17).map(|_| Vec::with_capacity(cap)).collect();
    let mut priority: Vec<&str> = Vec::with_capacity(cap);
    let mut shipmode: Vec<&str> = Vec::with_capacity(cap);
    let first = date_to_days(first_day());
    // Orders are placed early enough for every line to ship within the calendar.
    let last_order = date_to_days(last_day()) - 151;
    for o in 1..=card.orders as i64 {
        let lines = rng.gen_range(1..=7);
        let cust = rng.gen_range(1..=card.customers as i64);
        let odate = rng.gen_range(first..=last_order);
        let prio = *PRIORITIES.choose(rng).expect("non-empty");
        let start = c[0].len();
        let mut total = 0i64;
        for line in 1..=lines {
            let part = rng.gen_range(1..=card.parts as i64);
            let supp = rng.gen_range(1..=card.suppliers as i64);
            let qty = rng.gen_range(1..=50i64);
            let price = retail_price_cents(part);
            let ext = qty * price;
            let disc = rng.gen_range(0..=10i64);
            let tax = rng.gen_range(0..=8i64);
            total += ext;
            let row = [
                o,
                line,
                cust,
                part,
                supp,
                odate,
                0,
                0,
                qty,
                ext,
                0,
                disc,
                ext * (100 - disc) / 100,
                price * 6 / 10,
                tax,
                odate + rng.gen_range(30..=90),
                0,
            ];
            for (col, v) in c.iter_mut().zip(row) {
                col.push(v);
            }
            priority.push(prio);
            shipmode.push(SHIP_MODES.choose(rng).expect("non-empty"));
        }
        for v in &mut c[10][start..] {
            *v = total;
        }
    }
    let columns = def
        .columns
        .iter()
        .enumerate()
        .map(|(i, d)| match i {
            6 => Column::from_strs(d.clone(), &priority),
            16 => Column::from_strs(d.clone(), &shipmode),
            _ => Column::from_ints(d.clone(), &c[i]),
        })
        .collect::<Result<Vec<_>>>()?;
    build(def, columns)
}

/// Generate an SSB database. Identical `(scale_factor, seed)` yield identical databases.
pub fn generate_ssb(scale_factor: f64, seed: u64) -> Result<Database> {
    let card = cardinality(scale_factor)?;
    let lineorder = gen_lineorder(&card, &mut rng_for(seed, 1))?;
    let date = gen_date()?;
    let customer = gen_customer(card.customers, &mut rng_for(seed, 2))?;
    let supplier = gen_supplier(card.suppliers, &mut rng_for(seed, 3))?;
    let part = gen_part(card.parts, &mut rng_for(seed, 4))?;
    Database::new(vec![lineorder, date, customer, supplier, part])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Value;

    #[test]
    fn cardinalities() {
        let c = cardinality(0.01).unwrap();
        assert_eq!((c.orders, c.customers, c.suppliers, c.parts), (15_000, 300, 20, 2_000));
        assert_eq!(cardinality(1.0).unwrap().parts, 200_000);
        assert_eq!(cardinality(10.0).unwrap().parts, 800_000);
        assert!(cardinality(0.0).is_err());
        assert!(cardinality(f64::NAN).is_err());
    }

    #[test]
    fn sf_001_row_count() {
        let db = generate_ssb(0.01, 1).unwrap();
        let rows = db.table("lineorder").unwrap().rows() as f64;
        assert!((rows / 60_000.0 - 1.0).abs() < 0.02, "{rows}");
        assert_eq!(db.table("date").unwrap().rows(), 2557);
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_ssb(0.002, 9).unwrap(), generate_ssb(0.002, 9).unwrap());
        assert_ne!(generate_ssb(0.002, 9).unwrap(), generate_ssb(0.002, 10).unwrap());
    }

    #[test]
    fn domains() {
        let db = generate_ssb(0.002, 5).unwrap();
        let lo = db.table("lineorder").unwrap();
        for i in 0..lo.rows() {
            let q = lo.column("lo_quantity").unwrap().int(i).unwrap();
            let d = lo.column("lo_discount").unwrap().int(i).unwrap();
            assert!((1..=50).contains(&q) && (0..=10).contains(&d));
        }
        let cust = db.table("customer").unwrap();
        let c = cust.column("c_city").unwrap().value(0);
        assert_eq!(c.as_text().unwrap().len(), 10);
        let date = db.table("date").unwrap();
        let years: std::collections::BTreeSet<_> = date.column("d_year").unwrap().values().into_iter().collect();
        assert_eq!(years.len(), 7);
        assert_eq!(date.column("d_yearmonth").unwrap().value(0), Value::Text("Jan1992".into()));
        assert_eq!(city("UNITED KINGDOM", 1), "UNITED KI1");
        assert_eq!(city("PERU", 3), "PERU     3");
    }

    #[test]
    fn foreign_keys_resolve() {
        let db = generate_ssb(0.002, 5).unwrap();
        let lo = db.table("lineorder").unwrap();
        let n_cust = db.table("customer").unwrap().rows() as i64;
        let dates: std::collections::HashSet<i64> =
            (0..2557).map(|i| db.table("date").unwrap().column("d_datekey").unwrap().int(i).unwrap()).collect();
        for i in 0..lo.rows() {
            let c = lo.column("lo_custkey").unwrap().int(i).unwrap();
            assert!((1..=n_cust).contains(&c));
            assert!(dates.contains(&lo.column("lo_orderdate").unwrap().int(i).unwrap()));
        }
    }
}
