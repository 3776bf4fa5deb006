use std::collections::HashSet;

/// Coordinate access to a query point. Every read is metered.
pub trait ProbeSource {
    fn dim(&self) -> usize;

    fn read(&mut self, coord: usize) -> f64;

    /// Number of reads charged so far.
    fn probes(&self) -> u64;
}

impl<P: ProbeSource + ?Sized> ProbeSource for &mut P {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn read(&mut self, coord: usize) -> f64 {
        (**self).read(coord)
    }

    fn probes(&self) -> u64 {
        (**self).probes()
    }
}

/// A [`ProbeSource`] over an in-memory vector.
///
/// With caching off (the default) every `read` costs one probe. With caching
/// on, repeated reads of a coordinate are charged once.
#[derive(Debug, Clone)]
pub struct VecProbe<'a> {
    data: &'a [f64],
    probes: u64,
    seen: Option<HashSet<usize>>,
    trace: Option<Vec<usize>>,
}

impl<'a> VecProbe<'a> {
    pub fn new(data: &'a [f64]) -> Self {
        VecProbe {
            data,
            probes: 0,
            seen: None,
            trace: None,
        }
    }

    pub fn cached(mut self) -> Self {
        self.seen = Some(HashSet::new());
        self
    }

    /// Record every coordinate read, in order.
    pub fn traced(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> Option<&[usize]> {
        self.trace.as_deref()
    }
}

impl ProbeSource for VecProbe<'_> {
    fn dim(&self) -> usize {
        self.data.len()
    }

    fn read(&mut self, coord: usize) -> f64 {
        let fresh = match &mut self.seen {
            Some(seen) => seen.insert(coord),
            None => true,
        };
        if fresh {
            self.probes += 1;
        }
        if let Some(t) = &mut self.trace {
            t.push(coord);
        }
        self.data[coord]
    }

    fn probes(&self) -> u64 {
        self.probes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_read_without_cache() {
        let q = [1.0, 2.0, 3.0];
        let mut p = VecProbe::new(&q).traced();
        assert_eq!(p.read(1), 2.0);
        assert_eq!(p.read(1), 2.0);
        assert_eq!(p.read(0), 1.0);
        assert_eq!(p.probes(), 3);
        assert_eq!(p.trace().unwrap(), &[1, 1, 0]);
    }

    #[test]
    fn cache_charges_once_per_coordinate() {
        let q = [1.0, 2.0, 3.0];
        let mut p = VecProbe::new(&q).cached();
        for _ in 0..5 {
            p.read(2);
        }
        p.read(0);
        assert_eq!(p.probes(), 2);
    }
}
