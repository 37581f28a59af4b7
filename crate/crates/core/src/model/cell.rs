//! Topical attention and the topic-conditioned GRU step.

use super::params::Gru;
use crate::error::{Result, TdamError};
use crate::numerics::{Tape, Var};

/// Output of one topical attention read.
#[derive(Debug, Clone, Copy)]
pub struct TopicRead {
    /// Softmax weights over the `K` topics.
    pub alpha: Var,
    /// Local topic embedding: the `alpha`-weighted mix of topic rows.
    pub q: Var,
}

/// `u = tanh(W h + b)`, `alpha = softmax(E u)`, `q = Σ_k alpha_k e_k`.
pub fn topic_attention(tape: &mut Tape, h: Var, proj: Var, bias: Var, topics: Var) -> Result<TopicRead> {
    if tape.value(topics).rows() == 0 || tape.value(topics).is_empty() {
        return Err(TdamError::invalid("topic attention needs at least one topic"));
    }
    let wh = tape.matmul(proj, h)?;
    let pre = tape.add(wh, bias)?;
    let u = tape.tanh(pre);
    let scores = tape.matmul(topics, u)?;
    let alpha = tape.softmax(scores)?;
    let q = tape.mix(alpha, topics)?;
    Ok(TopicRead { alpha, q })
}

/// `W x + b + U h (+ V q)`, summed left to right.
fn gate_input(tape: &mut Tape, w: Var, b: Var, u: Var, v: Var, x: Var, h: Var, q: Option<Var>) -> Result<Var> {
    let wx = tape.matmul(w, x)?;
    let acc = tape.add(wx, b)?;
    let uh = tape.matmul(u, h)?;
    let mut acc = tape.add(acc, uh)?;
    if let Some(q) = q {
        let vq = tape.matmul(v, q)?;
        acc = tape.add(acc, vq)?;
    }
    Ok(acc)
}

/// One step of the topical GRU:
///
/// ```text
/// r  = σ(W_r x + U_r h + V_r q)
/// z  = σ(W_z x + U_z h + V_z q)
/// ĥ  = tanh(W_h x + r ⊙ (U_h h + V_h q))
/// h' = (1 − z) ⊙ h + z ⊙ ĥ
/// ```
///
/// With `q_prev = None` the topic terms are omitted, giving a standard GRU step.
/// `ones` is a constant all-ones vector of the hidden size.
pub fn topical_gru_step(
    tape: &mut Tape,
    gru: &Gru<Var>,
    x: Var,
    h_prev: Var,
    q_prev: Option<Var>,
    ones: Var,
) -> Result<Var> {
    let r_in = gate_input(tape, gru.w_r, gru.b_r, gru.u_r, gru.v_r, x, h_prev, q_prev)?;
    let r = tape.sigmoid(r_in);
    let z_in = gate_input(tape, gru.w_z, gru.b_z, gru.u_z, gru.v_z, x, h_prev, q_prev)?;
    let z = tape.sigmoid(z_in);

    let mut recur = tape.matmul(gru.u_h, h_prev)?;
    if let Some(q) = q_prev {
        let vq = tape.matmul(gru.v_h, q)?;
        recur = tape.add(recur, vq)?;
    }
    let gated = tape.mul(r, recur)?;
    let wx = tape.matmul(gru.w_h, x)?;
    let wxb = tape.add(wx, gru.b_h)?;
    let cand_in = tape.add(wxb, gated)?;
    let cand = tape.tanh(cand_in);

    let keep = tape.sub(ones, z)?;
    let kept = tape.mul(keep, h_prev)?;
    let fresh = tape.mul(z, cand)?;
    tape.add(kept, fresh)
}
