//! Catalog extraction from a live database's information schema.

use std::collections::BTreeMap;

use joinorder_core::catalog::{Catalog, CatalogError, ForeignKeyDef, TableDef};

/// Raw metadata as read from the database.
#[derive(Debug, Clone, Default)]
pub struct RawSchema {
    /// (table, exact row count)
    pub tables: Vec<(String, u64)>,
    /// (table, column) in ordinal order
    pub columns: Vec<(String, String)>,
    /// (table, constraint, column) for primary-key and unique constraints,
    /// columns in key order
    pub keys: Vec<(String, String, String)>,
    /// (constraint, from table, from column, to table, to column), columns in
    /// key order
    pub foreign_keys: Vec<(String, String, String, String, String)>,
}

/// Builds the catalog; the warnings describe gaps that weaken join
/// classification.
pub fn assemble_catalog(raw: &RawSchema) -> Result<(Catalog, Vec<String>), CatalogError> {
    let mut columns: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (t, c) in &raw.columns {
        columns.entry(t).or_default().push(c.clone());
    }
    let mut keys: BTreeMap<(&str, &str), Vec<String>> = BTreeMap::new();
    for (t, k, c) in &raw.keys {
        keys.entry((t, k)).or_default().push(c.clone());
    }
    let mut warnings = Vec::new();
    let tables = raw
        .tables
        .iter()
        .map(|(name, rows)| {
            let unique_keys: Vec<Vec<String>> = keys
                .iter()
                .filter(|((t, _), _)| t == name)
                .map(|(_, cols)| cols.clone())
                .collect();
            if unique_keys.is_empty() {
                warnings.push(format!("table `{name}` declares no primary or unique key"));
            }
            TableDef {
                name: name.clone(),
                row_count: *rows,
                columns: columns.get(name.as_str()).cloned().unwrap_or_default(),
                unique_keys,
            }
        })
        .collect();
    let mut fks: BTreeMap<&str, ForeignKeyDef> = BTreeMap::new();
    for (name, from_t, from_c, to_t, to_c) in &raw.foreign_keys {
        let fk = fks.entry(name).or_insert_with(|| ForeignKeyDef {
            from_table: from_t.clone(),
            from_columns: Vec::new(),
            to_table: to_t.clone(),
            to_columns: Vec::new(),
        });
        fk.from_columns.push(from_c.clone());
        fk.to_columns.push(to_c.clone());
    }
    if fks.is_empty() {
        warnings.push(
            "no foreign keys declared; joins on non-key columns will all be classified many-to-many".to_string(),
        );
    }
    let catalog = Catalog::new(tables, fks.into_values().collect())?;
    Ok((catalog, warnings))
}

const COLUMNS_SQL: &str = "SELECT table_name::text, column_name::text FROM information_schema.columns \
     WHERE table_schema = $1 ORDER BY table_name, ordinal_position";

const KEYS_SQL: &str = "SELECT tc.table_name::text, tc.constraint_name::text, kcu.column_name::text \
     FROM information_schema.table_constraints tc \
     JOIN information_schema.key_column_usage kcu \
       ON kcu.constraint_name = tc.constraint_name AND kcu.constraint_schema = tc.constraint_schema \
     WHERE tc.table_schema = $1 AND tc.constraint_type IN ('PRIMARY KEY', 'UNIQUE') \
     ORDER BY tc.table_name, tc.constraint_name, kcu.ordinal_position";

const FOREIGN_KEYS_SQL: &str = "SELECT rc.constraint_name::text, kcu.table_name::text, kcu.column_name::text, \
            ref.table_name::text, ref.column_name::text \
     FROM information_schema.referential_constraints rc \
     JOIN information_schema.key_column_usage kcu \
       ON kcu.constraint_name = rc.constraint_name AND kcu.constraint_schema = rc.constraint_schema \
     JOIN information_schema.key_column_usage ref \
       ON ref.constraint_name = rc.unique_constraint_name \
      AND ref.constraint_schema = rc.unique_constraint_schema \
      AND ref.ordinal_position = kcu.position_in_unique_constraint \
     WHERE kcu.table_schema = $1 \
     ORDER BY rc.constraint_name, kcu.ordinal_position";

fn quote(ident: &str) -> String {
    format!("\"{}\"", ident.replace('"', "\"\""))
}

/// Reads base tables of `schema` with exact row counts.
pub fn fetch_schema(client: &mut postgres::Client, schema: &str) -> Result<RawSchema, postgres::Error> {
    let names: Vec<String> = client
        .query(
            "SELECT table_name::text FROM information_schema.tables \
             WHERE table_schema = $1 AND table_type = 'BASE TABLE' ORDER BY table_name",
            &[&schema],
        )?
        .iter()
        .map(|r| r.get(0))
        .collect();
    let mut raw = RawSchema::default();
    for name in names {
        let count: i64 = client
            .query_one(&format!("SELECT count(*) FROM {}.{}", quote(schema), quote(&name)), &[])?
            .get(0);
        raw.tables.push((name, count.max(0) as u64));
    }
    raw.columns = client
        .query(COLUMNS_SQL, &[&schema])?
        .iter()
        .map(|r| (r.get(0), r.get(1)))
        .collect();
    raw.keys = client
        .query(KEYS_SQL, &[&schema])?
        .iter()
        .map(|r| (r.get(0), r.get(1), r.get(2)))
        .collect();
    raw.foreign_keys = client
        .query(FOREIGN_KEYS_SQL, &[&schema])?
        .iter()
        .map(|r| (r.get(0), r.get(1), r.get(2), r.get(3), r.get(4)))
        .collect();
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &str) -> String {
        v.to_string()
    }

    fn two_tables() -> RawSchema {
        RawSchema {
            tables: vec![(s("kind_type"), 7), (s("title"), 100)],
            columns: vec![
                (s("kind_type"), s("id")),
                (s("kind_type"), s("kind")),
                (s("title"), s("id")),
                (s("title"), s("kind_id")),
            ],
            keys: vec![(s("kind_type"), s("kind_pk"), s("id")), (s("title"), s("title_pk"), s("id"))],
            foreign_keys: vec![(s("title_kind_fk"), s("title"), s("kind_id"), s("kind_type"), s("id"))],
        }
    }

    #[test]
    fn two_tables_one_foreign_key() {
        let (cat, warnings) = assemble_catalog(&two_tables()).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(cat.table_count(), 2);
        assert_eq!(cat.table("title").unwrap().row_count, 100);
        assert_eq!(cat.foreign_keys().len(), 1);
        assert_eq!(cat.foreign_keys()[0].to_string(), "title(kind_id) -> kind_type(id)");
    }

    #[test]
    fn missing_foreign_keys_warn() {
        let mut raw = two_tables();
        raw.foreign_keys.clear();
        let (cat, warnings) = assemble_catalog(&raw).unwrap();
        assert!(cat.foreign_keys().is_empty());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("many-to-many"));
    }

    #[test]
    fn composite_keys_keep_column_order() {
        let mut raw = two_tables();
        raw.keys.push((s("title"), s("title_uk"), s("kind_id")));
        raw.keys.push((s("title"), s("title_uk"), s("id")));
        let (cat, _) = assemble_catalog(&raw).unwrap();
        assert!(cat.table("title").unwrap().unique_keys.contains(&vec![s("kind_id"), s("id")]));
    }

    #[test]
    fn keyless_table_warns() {
        let mut raw = two_tables();
        raw.keys.retain(|(t, _, _)| t != "title");
        let (_, warnings) = assemble_catalog(&raw).unwrap();
        assert!(warnings.iter().any(|w| w.contains("`title`")));
    }
}
