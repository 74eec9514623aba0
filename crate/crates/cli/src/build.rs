//! Evaluation of parsed specs into library objects.

use subseries::constructions::{
    ac_decay_function, ac_series_from_f, alternating_on, alternating_on_two, covm_series_from_y,
    d_bound_partition, d_bound_partition_below, diagonal_defeat, increasing_bijection,
    run_partition, split_witness_series, two_set_defeat, BairePoint, ConstructionError,
};
use subseries::index_set::{IndexSet, SetError};
use subseries::partition::{IntervalPartition, NatMap, PartitionError};
use subseries::rational::Rational;
use subseries::series::{Series, SeriesError};

use crate::spec::{builder, Kind, SpecExpr};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("expected {expected}, found `{found}`")]
    Expected {
        expected: &'static str,
        found: String,
    },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

type Result<T> = std::result::Result<T, BuildError>;

/// Defaults for builders whose horizon argument is optional.
#[derive(Debug, Clone, Copy)]
pub struct BuildContext {
    pub horizon: u64,
}

/// Threshold used by `two_set_defeat` when none is given.
pub const DEFAULT_DEFEAT_THRESHOLD: u64 = 10;

fn expected(what: &'static str, e: &SpecExpr) -> BuildError {
    BuildError::Expected {
        expected: what,
        found: e.to_string(),
    }
}

fn call<'a>(e: &'a SpecExpr, kind: Kind, what: &'static str) -> Result<(&'a str, &'a [SpecExpr])> {
    match e {
        SpecExpr::Call { name, args } if builder(name).map(|b| b.0) == Some(kind) => {
            Ok((name, args))
        }
        _ => Err(expected(what, e)),
    }
}

pub fn rational(e: &SpecExpr) -> Result<Rational> {
    match e {
        SpecExpr::Number(t) => t.parse().map_err(|_| expected("a rational", e)),
        _ => Err(expected("a rational", e)),
    }
}

pub fn natural(e: &SpecExpr) -> Result<u64> {
    match e {
        SpecExpr::Number(t) => t.parse().map_err(|_| expected("a natural number", e)),
        _ => Err(expected("a natural number", e)),
    }
}

fn bits(e: &SpecExpr) -> Result<&str> {
    match e {
        SpecExpr::Empty => Ok(""),
        SpecExpr::Number(t) if t.bytes().all(|b| b == b'0' || b == b'1') => Ok(t),
        _ => Err(expected("a bit string", e)),
    }
}

fn list(e: &SpecExpr) -> Result<&[SpecExpr]> {
    match e {
        SpecExpr::List(items) => Ok(items),
        _ => Err(expected("a list", e)),
    }
}

fn naturals(e: &SpecExpr) -> Result<Vec<u64>> {
    list(e)?.iter().map(natural).collect()
}

pub fn point(e: &SpecExpr) -> Result<BairePoint> {
    let blocks = list(e)?.iter().map(naturals).collect::<Result<Vec<_>>>()?;
    Ok(BairePoint::new(blocks)?)
}

pub fn series(e: &SpecExpr, ctx: &BuildContext) -> Result<Series> {
    let (name, args) = call(e, Kind::Series, "a series")?;
    Ok(match name {
        "altharmonic" => Series::alternating_harmonic(),
        "basel" => Series::basel(),
        "telescoping" => Series::telescoping(),
        "zero" => Series::zero(),
        "perturb" => series(&args[0], ctx)?.perturb_quadratic(&rational(&args[1])?),
        "scale" => series(&args[0], ctx)?.scale(&rational(&args[1])?)?,
        "flip" => series(&args[0], ctx)?.flip_signs_on(&set(&args[1], ctx)?),
        "restrict" => series(&args[0], ctx)?.restrict(&set(&args[1], ctx)?)?,
        "add" => series(&args[0], ctx)?.add_pointwise(&series(&args[1], ctx)?),
        "alternating_on" => alternating_on(&set(&args[0], ctx)?)?,
        "alternating_on_two" => alternating_on_two(
            &set(&args[0], ctx)?,
            &set(&args[1], ctx)?,
            natural(&args[2])?,
        )?,
        "split_witness" => {
            let h = args.get(1).map(natural).transpose()?.unwrap_or(ctx.horizon);
            split_witness_series(&set(&args[0], ctx)?, h)?
        }
        "covm_from_y" => {
            let n_max = natural(&args[1])? as usize;
            covm_series_from_y(&point(&args[0])?, n_max)
        }
        "ac_from_f" => ac_series_from_f(&map(&args[0], ctx)?, natural(&args[1])?)?,
        "diagonal_defeat" => {
            let family = list(&args[0])?
                .iter()
                .map(|s| set(s, ctx))
                .collect::<Result<Vec<_>>>()?;
            diagonal_defeat(&family, natural(&args[1])?, natural(&args[2])?)?.series
        }
        "two_set_defeat" => {
            let threshold = args
                .get(3)
                .map(natural)
                .transpose()?
                .unwrap_or(DEFAULT_DEFEAT_THRESHOLD);
            two_set_defeat(
                &set(&args[0], ctx)?,
                &set(&args[1], ctx)?,
                natural(&args[2])?,
                threshold,
            )?
            .series
        }
        _ => unreachable!("series table and evaluator agree"),
    })
}

pub fn set(e: &SpecExpr, ctx: &BuildContext) -> Result<IndexSet> {
    let (name, args) = call(e, Kind::Set, "an index set")?;
    Ok(match name {
        "evens" => IndexSet::evens(),
        "odds" => IndexSet::odds(),
        "omega" => IndexSet::omega(),
        "empty" => IndexSet::empty(),
        "mod" => IndexSet::modulo(natural(&args[0])?, natural(&args[1])?)?,
        "periodic" => IndexSet::periodic_bits(bits(&args[0])?, bits(&args[1])?)?,
        "finite" => IndexSet::finite(naturals(&args[0])?),
        "union" => set(&args[0], ctx)?.union(&set(&args[1], ctx)?),
        "inter" => set(&args[0], ctx)?.intersect(&set(&args[1], ctx)?),
        "diff" => set(&args[0], ctx)?.difference(&set(&args[1], ctx)?),
        "sdiff" => set(&args[0], ctx)?.symm_diff(&set(&args[1], ctx)?),
        "compl" => set(&args[0], ctx)?.complement(),
        "blocks" => {
            let p = partition(&args[0], ctx)?;
            match &args[1] {
                SpecExpr::Call { name, .. } if name == "even" => IndexSet::even_blocks(&p),
                SpecExpr::Call { name, .. } if name == "odd" => IndexSet::odd_blocks(&p),
                other => return Err(expected("`even` or `odd`", other)),
            }
        }
        "range" => IndexSet::range_of(&map(&args[0], ctx)?)?,
        _ => unreachable!("set table and evaluator agree"),
    })
}

pub fn partition(e: &SpecExpr, ctx: &BuildContext) -> Result<IntervalPartition> {
    let (name, args) = call(e, Kind::Partition, "an interval partition")?;
    Ok(match name {
        "singletons" => IntervalPartition::singletons(),
        "uniform" => IntervalPartition::uniform(natural(&args[0])?)?,
        "triangular" => IntervalPartition::triangular(),
        "geometric" => IntervalPartition::geometric(),
        "bounds" => IntervalPartition::from_boundaries(naturals(&args[0])?)?,
        "runs" => run_partition(&set(&args[0], ctx)?, ctx.horizon)?,
        "d_bound" if args.len() == 2 => {
            d_bound_partition_below(&series(&args[0], ctx)?, natural(&args[1])?)?
        }
        "d_bound" => d_bound_partition(
            &series(&args[0], ctx)?,
            natural(&args[1])?,
            natural(&args[2])?,
        )?,
        _ => unreachable!("partition table and evaluator agree"),
    })
}

pub fn map(e: &SpecExpr, ctx: &BuildContext) -> Result<NatMap> {
    let (name, args) = call(e, Kind::Map, "a map ω → ω")?;
    Ok(match name {
        "identity" => NatMap::identity(),
        "linear" => NatMap::linear(natural(&args[0])?, natural(&args[1])?),
        "table" => NatMap::table(naturals(&args[0])?),
        "enum" => increasing_bijection(&set(&args[0], ctx)?)?,
        "ac_decay" => ac_decay_function(&series(&args[0], ctx)?, natural(&args[1])?)?,
        _ => unreachable!("map table and evaluator agree"),
    })
}
