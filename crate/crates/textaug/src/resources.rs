//! Loaders for the paraphrase file and the `.vec` embedding file.

use std::io::{BufRead, BufReader};
use std::path::Path;

use textaug_core::lexicon::{EmbeddingBuilder, EmbeddingStats, EmbeddingStore, PpdbBuilder, PpdbStats, SynonymMap};

use crate::error::{Error, Result};

fn lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(f).lines())
}

pub fn load_ppdb(path: &Path, symmetrize: bool) -> Result<(SynonymMap, PpdbStats)> {
    let mut b = PpdbBuilder::new(symmetrize);
    for line in lines(path)? {
        b.push_line(&line.map_err(|e| Error::io(path, e))?);
    }
    b.finish().map_err(|e| Error::format(path, e.to_string()))
}

pub fn load_embeddings(path: &Path) -> Result<(EmbeddingStore, EmbeddingStats)> {
    let mut it = lines(path)?;
    let header = match it.next() {
        Some(h) => h.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::format(path, "empty embedding file")),
    };
    let mut b = EmbeddingBuilder::from_header(&header).map_err(|e| Error::format(path, e.to_string()))?;
    for line in it {
        b.push_line(&line.map_err(|e| Error::io(path, e))?);
    }
    let stats = b.stats();
    let store = b.finish().map_err(|e| Error::format(path, e.to_string()))?;
    Ok((store, stats))
}
