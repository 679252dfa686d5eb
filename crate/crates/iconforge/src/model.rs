//! Tag-predictor and embedding-table file I/O.

use crate::error::{CliError, CliResult};
use crate::formats::{read_json, write_json, TagModelFile, SCHEMA_VERSION};
use iconforge_core::summarize::{EmbeddingTable, TagPredictor, TagVocabulary};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

pub fn load_tag_model(path: &Path) -> CliResult<(TagPredictor, TagVocabulary)> {
    let file: TagModelFile = read_json(path)?;
    if file.vocab.len() != file.output_dim {
        return Err(CliError::in_file(
            path,
            format!(
                "vocabulary has {} tags but output_dim is {}",
                file.vocab.len(),
                file.output_dim
            ),
        ));
    }
    let model = TagPredictor {
        input_dim: file.input_dim,
        hidden: file.hidden,
        output_dim: file.output_dim,
        w1: file.w1,
        b1: file.b1,
        w2: file.w2,
        b2: file.b2,
    };
    model.validate().map_err(|e| CliError::in_file(path, e))?;
    let vocab = TagVocabulary::new(file.vocab).map_err(|e| CliError::in_file(path, e))?;
    Ok((model, vocab))
}

pub fn save_tag_model(
    path: &Path,
    model: &TagPredictor,
    vocab: &TagVocabulary,
) -> CliResult<()> {
    let file = TagModelFile {
        schema_version: SCHEMA_VERSION,
        input_dim: model.input_dim,
        hidden: model.hidden,
        output_dim: model.output_dim,
        vocab: vocab.tags().to_vec(),
        w1: model.w1.clone(),
        b1: model.b1.clone(),
        w2: model.w2.clone(),
        b2: model.b2.clone(),
    };
    write_json(path, &file)
}

/// Text embeddings, one line per word: `word v1 v2 ... vD`. The first line
/// fixes D; later lines must match.
pub fn load_embeddings(path: &Path) -> CliResult<EmbeddingTable> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| CliError::in_file(path, format!("line {}: {msg}", i + 1));
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line has a first token");
        let vector: Vec<f64> = parts
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| fail(format!("bad float '{t}': {e}")))
            })
            .collect::<Result<_, _>>()?;
        if vector.is_empty() {
            return Err(fail(format!("word '{word}' has no vector components")));
        }
        let table = match &mut table {
            Some(t) => t,
            None => table.insert(
                EmbeddingTable::new(vector.len()).map_err(|e| fail(e.to_string()))?,
            ),
        };
        table
            .insert(word, vector)
            .map_err(|e| fail(format!("word '{word}': {e}")))?;
    }
    table.ok_or_else(|| CliError::in_file(path, "embedding file is empty"))
}
