//! Sampled ion positions and their on-disk formats.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic            8 bytes  "LDTRAJ\0\x01"
//! species count    u32
//!   name length    u32, then UTF-8 name
//!   mass, charge   f64, f64
//!   ion count      u64
//! ion count        u64
//! frame count      u64
//! sample interval  f64 (s)
//! duration         f64 (s)
//! species index    u32 per ion
//! body             f64 x, y, z per ion, ion-major within each frame
//! ```

use std::io::{Read, Write};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::trap::Species;

const MAGIC: &[u8; 8] = b"LDTRAJ\0\x01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis {other}"))),
        }
    }
}

/// Uniformly sampled positions of all ions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    sample_interval: f64,
    species: Vec<Species>,
    species_index: Vec<usize>,
    /// frame-major, then ion, then x/y/z
    data: Vec<f64>,
    frames: usize,
}

impl Trajectory {
    pub fn new(sample_interval: f64, species: Vec<Species>, species_index: Vec<usize>) -> Result<Self> {
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(Error::InvalidParameter("sample interval must be positive".into()));
        }
        if species_index.iter().any(|&s| s >= species.len()) {
            return Err(Error::InvalidParameter("species index out of range".into()));
        }
        Ok(Self {
            sample_interval,
            species,
            species_index,
            data: Vec::new(),
            frames: 0,
        })
    }

    /// Builds a trajectory from per-frame position lists.
    pub fn from_frames(
        sample_interval: f64,
        species: Vec<Species>,
        species_index: Vec<usize>,
        frames: &[Vec<Vector3<f64>>],
    ) -> Result<Self> {
        let mut t = Self::new(sample_interval, species, species_index)?;
        for f in frames {
            t.push_frame(f)?;
        }
        Ok(t)
    }

    pub fn push_frame(&mut self, positions: &[Vector3<f64>]) -> Result<()> {
        if positions.len() != self.species_index.len() {
            return Err(Error::InvalidParameter(format!(
                "frame has {} ions, trajectory has {}",
                positions.len(),
                self.species_index.len()
            )));
        }
        self.data.reserve(3 * positions.len());
        for p in positions {
            self.data.extend_from_slice(&[p.x, p.y, p.z]);
        }
        self.frames += 1;
        Ok(())
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn n_frames(&self) -> usize {
        self.frames
    }

    pub fn n_ions(&self) -> usize {
        self.species_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    /// (frames - 1) * interval; zero for an empty trajectory.
    pub fn duration(&self) -> f64 {
        self.frames.saturating_sub(1) as f64 * self.sample_interval
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_index(&self) -> &[usize] {
        &self.species_index
    }

    pub fn ions_of(&self, species: &Species) -> Vec<usize> {
        match self.species.iter().position(|s| s == species) {
            Some(slot) => (0..self.n_ions())
                .filter(|&i| self.species_index[i] == slot)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Ions of `species`, or an error when there are none.
    pub fn require_ions(&self, species: &Species) -> Result<Vec<usize>> {
        let ions = self.ions_of(species);
        if ions.is_empty() {
            Err(Error::SpeciesAbsent(species.name.clone()))
        } else {
            Ok(ions)
        }
    }

    pub fn position(&self, frame: usize, ion: usize) -> Vector3<f64> {
        let o = 3 * (frame * self.n_ions() + ion);
        Vector3::new(self.data[o], self.data[o + 1], self.data[o + 2])
    }

    pub fn frame(&self, frame: usize) -> Vec<Vector3<f64>> {
        (0..self.n_ions()).map(|i| self.position(frame, i)).collect()
    }

    /// Time series of one coordinate of one ion.
    pub fn coordinate(&self, ion: usize, axis: Axis) -> Vec<f64> {
        let stride = 3 * self.n_ions();
        let o = 3 * ion + axis.index();
        self.data.iter().skip(o).step_by(stride).copied().collect()
    }

    /// Distance from the trap axis, sqrt(x^2 + y^2), per frame.
    pub fn radius(&self, ion: usize) -> Vec<f64> {
        let x = self.coordinate(ion, Axis::X);
        let y = self.coordinate(ion, Axis::Y);
        x.iter().zip(&y).map(|(a, b)| a.hypot(*b)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.frames)
            .map(|k| k as f64 * self.sample_interval)
            .collect()
    }

    /// Copy restricted to frames `start..end`.
    pub fn window(&self, start: usize, end: usize) -> Trajectory {
        let end = end.min(self.frames);
        let start = start.min(end);
        let w = 3 * self.n_ions();
        Trajectory {
            sample_interval: self.sample_interval,
            species: self.species.clone(),
            species_index: self.species_index.clone(),
            data: self.data[start * w..end * w].to_vec(),
            frames: end - start,
        }
    }

    /// Copy with every coordinate transformed by `f`.
    pub fn map_positions(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Trajectory {
        let mut out = self.clone();
        for chunk in out.data.chunks_exact_mut(3) {
            let p = f(Vector3::new(chunk[0], chunk[1], chunk[2]));
            chunk.copy_from_slice(&[p.x, p.y, p.z]);
        }
        out
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.species.len() as u32).to_le_bytes())?;
        for (slot, s) in self.species.iter().enumerate() {
            let name = s.name.as_bytes();
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name)?;
            w.write_all(&s.mass.to_le_bytes())?;
            w.write_all(&s.charge.to_le_bytes())?;
            let count = self.species_index.iter().filter(|&&k| k == slot).count();
            w.write_all(&(count as u64).to_le_bytes())?;
        }
        w.write_all(&(self.n_ions() as u64).to_le_bytes())?;
        w.write_all(&(self.frames as u64).to_le_bytes())?;
        w.write_all(&self.sample_interval.to_le_bytes())?;
        w.write_all(&self.duration().to_le_bytes())?;
        for &k in &self.species_index {
            w.write_all(&(k as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * 3 * self.n_ions());
        for frame in self.data.chunks(3 * self.n_ions().max(1)) {
            buf.clear();
            for v in frame {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::TrajectoryFormat("bad magic".into()));
        }
        let n_species = read_u32(&mut r)? as usize;
        if n_species > 1024 {
            return Err(Error::TrajectoryFormat(format!("{n_species} species")));
        }
        let mut species = Vec::with_capacity(n_species);
        let mut counts = Vec::with_capacity(n_species);
        for _ in 0..n_species {
            let len = read_u32(&mut r)? as usize;
            if len > 4096 {
                return Err(Error::TrajectoryFormat("species name too long".into()));
            }
            let mut name = vec![0u8; len];
            read_exact(&mut r, &mut name)?;
            let name = String::from_utf8(name)
                .map_err(|_| Error::TrajectoryFormat("species name is not UTF-8".into()))?;
            let mass = read_f64(&mut r)?;
            let charge = read_f64(&mut r)?;
            counts.push(read_u64(&mut r)? as usize);
            species.push(Species { name, mass, charge });
        }
        let n_ions = read_u64(&mut r)? as usize;
        let frames = read_u64(&mut r)? as usize;
        let sample_interval = read_f64(&mut r)?;
        let duration = read_f64(&mut r)?;
        if counts.iter().sum::<usize>() != n_ions {
            return Err(Error::TrajectoryFormat(
                "species counts do not add up to the ion count".into(),
            ));
        }
        let expected = frames.saturating_sub(1) as f64 * sample_interval;
        if (duration - expected).abs() > 1e-9 * expected.abs().max(sample_interval) {
            return Err(Error::TrajectoryFormat(format!(
                "duration {duration} s does not match {frames} frames at {sample_interval} s"
            )));
        }
        let mut species_index = Vec::with_capacity(n_ions);
        for _ in 0..n_ions {
            species_index.push(read_u32(&mut r)? as usize);
        }
        for (slot, &c) in counts.iter().enumerate() {
            if species_index.iter().filter(|&&k| k == slot).count() != c {
                return Err(Error::TrajectoryFormat(format!(
                    "species {slot} count does not match the index table"
                )));
            }
        }
        let mut t = Trajectory::new(sample_interval, species, species_index)
            .map_err(|e| Error::TrajectoryFormat(e.to_string()))?;
        let total = frames
            .checked_mul(3 * n_ions)
            .ok_or_else(|| Error::TrajectoryFormat("size overflow".into()))?;
        let mut bytes = vec![0u8; total * 8];
        read_exact(&mut r, &mut bytes)?;
        t.data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        t.frames = frames;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::TrajectoryFormat("trailing bytes after body".into()));
        }
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_binary(std::io::BufReader::new(f))
    }

    /// Text export: one row per ion and frame.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# sample_interval_s={:.16e}", self.sample_interval)?;
        writeln!(w, "# duration_s={:.16e}", self.duration())?;
        for (slot, s) in self.species.iter().enumerate() {
            writeln!(w, "# species {slot}: {} mass_kg={:.16e} charge_C={:.16e}", s.name, s.mass, s.charge)?;
        }
        writeln!(w, "frame,time_s,ion,species,x_m,y_m,z_m")?;
        for f in 0..self.frames {
            let t = f as f64 * self.sample_interval;
            for i in 0..self.n_ions() {
                let p = self.position(f, i);
                writeln!(
                    w,
                    "{f},{t:.16e},{i},{},{:.16e},{:.16e},{:.16e}",
                    self.species[self.species_index[i]].name, p.x, p.y, p.z
                )?;
            }
        }
        Ok(())
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::TrajectoryFormat("truncated file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
