//! Versioned flat binary persistence of a replay buffer.
//!
//! Layout (all little-endian): 8-byte magic `DXPRBUF1`, then u32 capacity,
//! u32 occupied, u32 t_seq, u32 obs_dim, followed by trajectories in
//! insertion order: f32 row-major observations, f32 actions, f32 extrinsic
//! rewards, u8 step flags (bit 0 = is_first, bit 1 = is_terminal), then the
//! f64 signal fields (return, reconstruction error, value error, priority)
//! and the u64 insert id.
//!
//! Observations and rewards are truncated to f32 on disk; intrinsic/mixed
//! reward annotations are not persisted. Only discrete-action trajectories
//! can be snapshotted, since the header carries no action dimension.

use std::io::{Read, Write};
use std::path::Path;

use super::{PriorityWeights, ReplayBuffer, SampleMode, Trajectory, Transition};
use crate::action::Action;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"DXPRBUF1";

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format("replay snapshot", "unexpected end of file"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

pub fn write_snapshot(buffer: &ReplayBuffer, path: &Path) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(buffer.capacity() as u32).to_le_bytes());
    out.extend_from_slice(&(buffer.occupied() as u32).to_le_bytes());
    out.extend_from_slice(&(buffer.t_seq() as u32).to_le_bytes());
    out.extend_from_slice(&(buffer.obs_dim() as u32).to_le_bytes());

    let mut order: Vec<usize> = (0..buffer.occupied()).collect();
    order.sort_by_key(|&slot| buffer.get(slot).unwrap().insert_id);

    for slot in order {
        let traj = buffer.get(slot).unwrap();
        for t in &traj.transitions {
            for &x in &t.observation {
                out.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        for t in &traj.transitions {
            match &t.action {
                Action::Discrete(i) => out.extend_from_slice(&(*i as f32).to_le_bytes()),
                Action::Continuous(_) => {
                    return Err(Error::format(
                        "replay snapshot",
                        "continuous actions are not representable in this format",
                    ))
                }
            }
        }
        for t in &traj.transitions {
            out.extend_from_slice(&(t.reward_ext as f32).to_le_bytes());
        }
        for t in &traj.transitions {
            let flags = (t.is_first as u8) | ((t.is_terminal as u8) << 1);
            out.push(flags);
        }
        out.extend_from_slice(&traj.return_ext.to_le_bytes());
        out.extend_from_slice(&traj.recon_error.to_le_bytes());
        out.extend_from_slice(&traj.value_error.to_le_bytes());
        out.extend_from_slice(&traj.priority.to_le_bytes());
        out.extend_from_slice(&traj.insert_id.to_le_bytes());
    }

    let mut f = std::fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

pub fn read_snapshot(
    path: &Path,
    weights: PriorityWeights,
    mode: SampleMode,
) -> Result<ReplayBuffer> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Reader { buf: &bytes, pos: 0 };

    if r.take(8)? != MAGIC {
        return Err(Error::format("replay snapshot", "bad magic"));
    }
    let capacity = r.u32()? as usize;
    let occupied = r.u32()? as usize;
    let t_seq = r.u32()? as usize;
    let obs_dim = r.u32()? as usize;
    if occupied > capacity {
        return Err(Error::format("replay snapshot", "occupied exceeds capacity"));
    }

    let mut buffer = ReplayBuffer::new(capacity, t_seq, obs_dim, weights, mode)?;
    for _ in 0..occupied {
        let mut observations = vec![vec![0.0f64; obs_dim]; t_seq];
        for row in observations.iter_mut() {
            for x in row.iter_mut() {
                *x = r.f32()? as f64;
            }
        }
        let mut actions = Vec::with_capacity(t_seq);
        for _ in 0..t_seq {
            actions.push(Action::Discrete(r.f32()? as usize));
        }
        let mut rewards = Vec::with_capacity(t_seq);
        for _ in 0..t_seq {
            rewards.push(r.f32()? as f64);
        }
        let mut flags = Vec::with_capacity(t_seq);
        for _ in 0..t_seq {
            flags.push(r.u8()?);
        }
        let transitions: Vec<Transition> = (0..t_seq)
            .map(|i| Transition {
                observation: std::mem::take(&mut observations[i]),
                action: actions[i].clone(),
                reward_ext: rewards[i],
                is_first: flags[i] & 1 != 0,
                is_terminal: flags[i] & 2 != 0,
                reward_intr: 0.0,
                reward_total: rewards[i],
            })
            .collect();
        let mut traj = Trajectory::new(transitions);
        traj.return_ext = r.f64()?;
        traj.recon_error = r.f64()?;
        traj.value_error = r.f64()?;
        traj.priority = r.f64()?;
        traj.insert_id = r.u64()?;
        buffer.restore_slot(traj)?;
    }
    Ok(buffer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::PriorityUpdate;

    fn sample_buffer() -> ReplayBuffer {
        let mut buf = ReplayBuffer::new(
            4,
            3,
            2,
            PriorityWeights::default(),
            SampleMode::Prioritized,
        )
        .unwrap();
        for k in 0..6u64 {
            let transitions = (0..3)
                .map(|i| Transition {
                    observation: vec![k as f64 + i as f64 * 0.5, 0.25],
                    action: Action::Discrete(i % 2),
                    reward_ext: if i == 2 { 1.0 } else { 0.0 },
                    is_first: i == 0,
                    is_terminal: i == 2,
                    reward_intr: 0.0,
                    reward_total: if i == 2 { 1.0 } else { 0.0 },
                })
                .collect();
            buf.add(Trajectory::new(transitions)).unwrap();
        }
        let updates: Vec<PriorityUpdate> = (0..4)
            .map(|slot| PriorityUpdate {
                slot,
                insert_id: buf.get(slot).unwrap().insert_id,
                recon_error: 0.5 + slot as f64,
                value_error: 0.125,
            })
            .collect();
        buf.update_priorities(&updates).unwrap();
        buf
    }

    #[test]
    fn snapshot_round_trip_preserves_ring_and_priorities() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("replay.bin");
        let buf = sample_buffer();
        write_snapshot(&buf, &path).unwrap();
        let loaded =
            read_snapshot(&path, PriorityWeights::default(), SampleMode::Prioritized).unwrap();

        assert_eq!(loaded.capacity(), buf.capacity());
        assert_eq!(loaded.occupied(), buf.occupied());
        assert_eq!(loaded.insert_ids(), buf.insert_ids());
        for slot in 0..buf.occupied() {
            let a = buf.get(slot).unwrap();
            let b = loaded.get(slot).unwrap();
            assert_eq!(a.insert_id, b.insert_id);
            assert_eq!(a.priority.to_bits(), b.priority.to_bits());
            assert_eq!(a.return_ext.to_bits(), b.return_ext.to_bits());
            assert_eq!(a.transitions.len(), b.transitions.len());
            for (ta, tb) in a.transitions.iter().zip(&b.transitions) {
                assert_eq!(ta.action, tb.action);
                assert_eq!(ta.is_first, tb.is_first);
                assert_eq!(ta.is_terminal, tb.is_terminal);
                // observations pass through f32
                for (xa, xb) in ta.observation.iter().zip(&tb.observation) {
                    assert_eq!(*xa as f32, *xb as f32);
                }
            }
        }
        assert!((loaded.total_priority() - buf.total_priority()).abs() < 1e-9);
    }

    #[test]
    fn second_serialization_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.bin");
        let p2 = dir.path().join("b.bin");
        let buf = sample_buffer();
        write_snapshot(&buf, &p1).unwrap();
        let loaded = read_snapshot(&p1, PriorityWeights::default(), SampleMode::Prioritized).unwrap();
        write_snapshot(&loaded, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTABUF0____").unwrap();
        assert!(read_snapshot(&path, PriorityWeights::default(), SampleMode::Uniform).is_err());
    }
}
