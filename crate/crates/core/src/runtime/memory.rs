use serde::{Deserialize, Serialize};

pub const DEFAULT_CAPACITY: usize = 32;

/// An outcome appended to working memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub digest: String,
    /// Non-negative importance score.
    pub importance: f64,
}

/// A consolidated batch of working memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodicEntry {
    pub summary: String,
    pub weight: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub description: String,
}

/// Feedback accompanying an outcome. A revised intent replaces the current
/// top goal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub revised_intent: Option<Goal>,
}

/// Working buffer, weighted episodic store and goal stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryState {
    working: Vec<Observation>,
    episodic: Vec<EpisodicEntry>,
    goals: Vec<Goal>,
    capacity: usize,
    consolidations: u64,
}

impl Default for MemoryState {
    fn default() -> Self {
        MemoryState::new(DEFAULT_CAPACITY)
    }
}

impl MemoryState {
    pub fn new(capacity: usize) -> Self {
        MemoryState { working: Vec::new(), episodic: Vec::new(), goals: Vec::new(), capacity, consolidations: 0 }
    }

    pub fn working(&self) -> &[Observation] {
        &self.working
    }

    pub fn episodic(&self) -> &[EpisodicEntry] {
        &self.episodic
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn consolidations(&self) -> u64 {
        self.consolidations
    }

    pub fn push_goal(&mut self, goal: Goal) {
        self.goals.push(goal);
    }

    /// Appends `outcome`, consolidates once the buffer exceeds capacity, and
    /// applies any revised intent from `feedback`.
    pub fn update(&mut self, outcome: Observation, feedback: &Feedback) {
        self.working.push(Observation { importance: outcome.importance.max(0.0), ..outcome });
        if self.working.len() > self.capacity {
            self.consolidate();
        }
        if let Some(goal) = &feedback.revised_intent {
            match self.goals.last_mut() {
                Some(top) => *top = goal.clone(),
                None => self.goals.push(goal.clone()),
            }
        }
    }

    fn consolidate(&mut self) {
        let size = self.working.len();
        let weight = self.working.iter().map(|o| o.importance).sum::<f64>() / size as f64;
        let summary = self.working.iter().map(|o| o.digest.as_str()).collect::<Vec<_>>().join("; ");
        self.working.clear();
        self.episodic.push(EpisodicEntry { summary, weight, size });
        self.consolidations += 1;
    }
}
