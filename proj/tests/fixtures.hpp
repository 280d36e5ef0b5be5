#pragma once

// Small PDDL texts shared by the unit tests.

namespace fixtures {

inline constexpr const char* kPickPlaceDomain = R"(
(define (domain pick-place)
  (:requirements :strips :typing :negative-preconditions)
  (:types obj region)
  (:predicates (on ?o - obj ?r - region) (handempty) (holding ?o - obj))
  (:action Pick
    :parameters (?o - obj ?r - region)
    :precondition (and
      (on ?o ?r)
      (handempty))
    :effect (and
      (not (on ?o ?r))
      (holding ?o)
      (not (handempty))))
  (:action Place
    :parameters (?o - obj ?r - region)
    :precondition (holding ?o)
    :effect (and
      (on ?o ?r)
      (not (holding ?o))
      (handempty))))
)";

inline constexpr const char* kPickPlaceProblem = R"(
(define (problem apple)
  (:domain pick-place)
  (:objects apple orange - obj table rack - region)
  (:init (on apple table) (on orange table) (handempty))
  (:goal (on apple rack)))
)";

inline constexpr const char* kPlaceGeom = R"(
(define (geometric pick-place)
  (:geom-action Place
    :parameters (?o - obj ?r - region)
    :inputs (?g - grasp)
    :outputs (?p - pose)
    :geom-precondition (and
      (in-grasp ?o ?g)
      (sample-pose ?o ?r ?p))
    :geom-effect (and
      (not (in-grasp ?o ?g))
      (at-pose ?o ?p))))
)";

inline constexpr const char* kIkPlaceGeom = R"(
(define (geometric ik)
  (:geom-action Place
    :parameters (?o - obj ?r - region)
    :inputs (?q1 - conf ?g - grasp)
    :outputs (?p - pose ?q2 - conf ?t - traj)
    :geom-precondition (and
      (in-grasp ?o ?g)
      (at-conf ?q1)
      (sample-pose ?o ?r ?p)
      (sample-ik ?o ?p ?g ?q2 ?t)
      (forall ?oo - obj
        (forall ?pp - pose
          (when
            (and
              (at-pose ?oo ?pp)
              (not (= ?oo ?o)))
            (check-collision ?t ?oo ?pp)))))
    :geom-effect (and
      (not (in-grasp ?o ?g))
      (at-pose ?o ?p)
      (not (at-conf ?q1))
      (at-conf ?q2))))
)";

inline constexpr const char* kIkStreams = R"(
(define (stream ik)
  (:stream sample-pose
    :inputs (?o - obj ?r - region)
    :outputs (?p - pose))
  (:stream sample-ik
    :inputs (?o - obj ?p - pose ?g - grasp)
    :outputs (?q2 - conf ?t - traj))
  (:stream check-collision
    :inputs (?t - traj ?oo - obj ?pp - pose)
    :outputs ()))
)";

inline constexpr const char* kBlockCollisionStream = R"(
(:stream check-block-collision
  :inputs (?t - traj ?l1 - gridloc
    ?b2 - block ?l2 - gridloc)
  :fail-effect (and
    (when (not (clear ?l2))
      (blocked ?l1))
    (when (clear ?l2)
      (not (blocked ?l1)))))
)";

inline constexpr const char* kPickPlaceGeom = R"(
(define (geometric pick-place)
  (:geom-action Pick
    :parameters (?o - obj ?r - region)
    :inputs (?p - pose)
    :outputs (?g - grasp)
    :geom-precondition (and
      (at-pose ?o ?p)
      (sample-grasp ?o ?p ?g))
    :geom-effect (and
      (not (at-pose ?o ?p))
      (in-grasp ?o ?g)))
  (:geom-action Place
    :parameters (?o - obj ?r - region)
    :inputs (?g - grasp)
    :outputs (?p - pose)
    :geom-precondition (and
      (in-grasp ?o ?g)
      (sample-pose ?o ?r ?p))
    :geom-effect (and
      (not (in-grasp ?o ?g))
      (at-pose ?o ?p))))
)";

inline constexpr const char* kPickPlaceStreams = R"(
(define (stream pick-place)
  (:stream sample-grasp
    :inputs (?o - obj ?p - pose)
    :outputs (?g - grasp))
  (:stream sample-pose
    :inputs (?o - obj ?r - region)
    :outputs (?p - pose)))
)";

}  // namespace fixtures
